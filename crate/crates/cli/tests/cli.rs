use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn isospec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isospec"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let gen = isospec(
        dir.path(),
        &["gen", "--periods", "2,3,5", "--pattern", "pair:1,2", "--seed", "7", "-o", "v.json"],
    );
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
    let partner = isospec(dir.path(), &["gen", "--from", "v.json", "--op", "translate=1,2,3", "--shift", "0.25", "-o", "y.json"]);
    assert_eq!(code(&partner), 0);
    dir
}

#[test]
fn generated_separable_potential_checks() {
    let dir = workdir();
    let out = isospec(dir.path(), &["sep", "check", "--pattern", "pair:1,2", "v.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["check"]["pass"], true);
}

#[test]
fn self_comparison_has_zero_deviation() {
    let dir = workdir();
    let out = isospec(dir.path(), &["iso", "check", "--mode", "fermi", "--lambda0", "0.5,0", "v.json", "v.json"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "PASS");
    assert_eq!(r["result"]["max_rel_dev"], 0.0);
}

#[test]
fn coprime_det_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = isospec(dir.path(), &["verify", "coprime-det", "--periods", "2,3,5"]);
    assert_eq!(code(&out), 0);
    let r = report(&out)["result"].clone();
    assert_eq!(r["tuples"], 900);
    assert_eq!(r["unclassified"], 0);
    assert_eq!(r["vanishing"], r["classified"]);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = workdir();
    let args = ["--seed", "11", "iso", "check", "--mode", "fermi", "--lambda0", "0.3", "--method", "random", "v.json", "y.json"];
    let a = isospec(dir.path(), &args);
    let b = isospec(dir.path(), &args);
    let mut single = vec!["--threads", "1"];
    single.extend_from_slice(&args);
    let c = isospec(dir.path(), &single);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);

    let gen = |threads: &str| {
        isospec(dir.path(), &["--threads", threads, "gen", "--periods", "3,4,5", "--complex", "--seed", "3"]).stdout
    };
    assert_eq!(gen("1"), gen("4"));
}

#[test]
fn reports_carry_version_seed_and_tolerance() {
    let dir = workdir();
    let out = isospec(dir.path(), &["--tol", "1e-6", "--seed", "9", "dft", "v.json"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["tool"], "isospec");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["seed"], 9);
    assert_eq!(r["tol"], 1e-6);

    let out = isospec(dir.path(), &["verify", "avg-shift", "--S", "1,2", "--conclusion-tol", "1e-9", "v.json", "y.json"]);
    let r = report(&out);
    assert_eq!(r["tol"], 1e-8);
    assert_eq!(r["conclusion_tol"], 1e-9);
}

#[test]
fn exit_codes() {
    let dir = workdir();
    // not Fermi isospectral: a single-site perturbation
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    let x = v["values"][4][0].as_f64().unwrap();
    v["values"][4][0] = (x + 0.5).into();
    std::fs::write(dir.path().join("w.json"), v.to_string()).unwrap();
    let fail = isospec(dir.path(), &["iso", "check", "--mode", "fermi", "--lambda0", "0.5", "v.json", "w.json"]);
    assert_eq!(code(&fail), 1);
    assert_eq!(report(&fail)["result"]["verdict"], "FAIL");

    let usage = isospec(dir.path(), &["frobnicate"]);
    assert_eq!(code(&usage), 2);
    assert!(usage.stdout.is_empty());
    assert!(!usage.stderr.is_empty());

    let missing = isospec(dir.path(), &["dft", "nope.json"]);
    assert_eq!(code(&missing), 2);

    // the mean-shift theorem needs at least two coordinates in S
    let hypothesis = isospec(dir.path(), &["verify", "avg-shift", "--S", "1", "v.json", "y.json"]);
    assert_eq!(code(&hypothesis), 3);

    // a premise that does not hold is reported, not concluded from
    let premise = isospec(dir.path(), &["verify", "avg-shift", "--S", "1,2", "v.json", "w.json"]);
    assert_eq!(code(&premise), 3);
    assert_eq!(report(&premise)["result"]["verdict"], "PREMISE_FAILED");
}

#[test]
fn partner_passes_mean_shift_and_transfer() {
    let dir = workdir();
    let out = isospec(dir.path(), &["verify", "avg-shift", "--S", "1,2", "--lambda1", "0.2", "--lambda2", "0.45", "v.json", "y.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));

    let out = isospec(dir.path(), &["verify", "transfer", "--pattern", "pair:1,2", "--op", "reflect", "v.json"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn charpoly_and_eig_dumps() {
    let dir = workdir();
    let out = isospec(dir.path(), &["charpoly", "--lambda0", "0.3,-0.1", "v.json"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["result"]["poly"]["bounds"], serde_json::json!([[-15, 15], [-10, 10], [-6, 6]]));
    assert!(r["result"]["fresh_residual"].as_f64().unwrap() < 1e-8);

    let out = isospec(dir.path(), &["eig", "--k", "0.1,0.2,-0.3", "v.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["eigenvalues"].as_array().unwrap().len(), 30);
}

#[test]
fn closed_stdout_does_not_panic() {
    let dir = workdir();
    let mut child = Command::new(env!("CARGO_BIN_EXE_isospec"))
        .current_dir(dir.path())
        .args(["charpoly", "--lambda0", "0.3", "v.json"])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let out = child.wait_with_output().unwrap();
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}
