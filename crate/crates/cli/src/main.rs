mod args;
mod report;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::Parser;
use isospec::harness::{self, PremiseMode, Tolerances};
use isospec::isospectral::{self, IsoSpec, Method, Mode, Verdict};
use isospec::{floquet, laurent, separability, Complex64, Error, Kind, PeriodLattice, Potential, Transform};
use serde_json::json;

use args::{Cli, CliMethod, CliMode, Command, IsoCommand, Lambda2, RecipeArgs, SepCommand, SpectralArgs, VerifyCommand};
use report::{Outcome, Report};

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotSeparable { .. } | Error::DegreeBoundViolation { .. } => 1,
            Error::HypothesisViolation(_) => 3,
            _ => 2,
        };
        Failure { code, err: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure { code: 2, err }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Run<Potential> {
    Ok(Potential::read(path)?)
}

fn verdict_outcome(v: Verdict) -> Outcome {
    match v {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
        Verdict::PremiseFailed => Outcome::Premise,
    }
}

fn coords(s: &Option<Vec<usize>>, d: usize) -> Run<Vec<usize>> {
    match s {
        None => Ok((0..d).collect()),
        Some(list) => list
            .iter()
            .map(|&j| {
                if j == 0 || j > d {
                    Err(anyhow!("coordinate {j} outside 1..={d}").into())
                } else {
                    Ok(j - 1)
                }
            })
            .collect(),
    }
}

fn apply_recipe(v: &Potential, recipe: &RecipeArgs) -> Run<Potential> {
    let y = v.apply_all(&recipe.ops)?;
    Ok(match recipe.shift {
        Some(c) => y.transform(&Transform::AddConstant(c))?,
        None => y,
    })
}

fn values_json(v: &[Complex64]) -> serde_json::Value {
    json!(v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

/// Builds the claim for `iso check`.
fn build_spec(mode: CliMode, sp: &SpectralArgs, v: &Potential, y: &Potential) -> Run<IsoSpec> {
    let d = v.lattice().dim();
    let s = coords(&sp.s, d)?;
    let lambda1 = sp.lambda1.or(sp.lambda0);
    let lambda1 = match (mode, lambda1) {
        (CliMode::Floquet, _) => Complex64::new(0.0, 0.0),
        (_, Some(l)) => l,
        (_, None) => return Err(anyhow!("--lambda0 or --lambda1 is required for this mode").into()),
    };
    let derived = isospectral::derive_lambda2(v, y, lambda1);
    let lambda2 = match (sp.lambda2, mode) {
        (Some(Lambda2::Value(x)), _) => x,
        (Some(Lambda2::Auto), _) => derived,
        (None, CliMode::Genfermi | CliMode::Genpartial) => derived,
        (None, _) => lambda1,
    };
    let mode = match mode {
        CliMode::Floquet => Mode::Floquet,
        CliMode::Fermi => Mode::Fermi,
        CliMode::Partial if lambda1 == lambda2 => Mode::PartialFermi,
        CliMode::Partial | CliMode::Genpartial => Mode::GeneralizedPartialFermi,
        CliMode::Genfermi => Mode::GeneralizedFermi,
    };
    let mut spec = IsoSpec::new(mode, s, lambda1, lambda2);
    for &(j, k) in &sp.fix {
        spec = spec.with_fixed(j, k);
    }
    Ok(spec)
}

/// The generalized claim used by the theorem checks: `λ₂` defaults to `λ₁`.
fn theorem_spec(sp: &SpectralArgs, v: &Potential, y: &Potential) -> Run<IsoSpec> {
    let d = v.lattice().dim();
    let s = coords(&sp.s, d)?;
    let lambda1 = sp.lambda1.or(sp.lambda0).unwrap_or_default();
    let lambda2 = match sp.lambda2 {
        Some(Lambda2::Value(x)) => x,
        Some(Lambda2::Auto) => isospectral::derive_lambda2(v, y, lambda1),
        None => lambda1,
    };
    let mode = if s.len() == d {
        Mode::GeneralizedFermi
    } else {
        Mode::GeneralizedPartialFermi
    };
    let mut spec = IsoSpec::new(mode, s, lambda1, lambda2);
    for &(j, k) in &sp.fix {
        spec = spec.with_fixed(j, k);
    }
    Ok(spec)
}

fn run(cli: &Cli) -> Run<u8> {
    let rep = |command: &str| Report::new(command, cli.seed, cli.tol);
    match &cli.command {
        Command::Gen(g) => {
            let v = if let Some(path) = &g.from {
                apply_recipe(&read(path)?, &g.recipe)?
            } else {
                let periods = g.periods.as_ref().ok_or_else(|| anyhow!("--periods or --from is required"))?;
                let lat = PeriodLattice::new(periods)?;
                let kind = if g.complex { Kind::Complex } else { Kind::Real };
                let v = match &g.pattern {
                    Some(p) => Potential::random_separable(lat, p, cli.seed, kind)?,
                    None => Potential::random(lat, cli.seed, kind),
                };
                apply_recipe(&v, &g.recipe)?
            };
            match &g.output {
                Some(path) => {
                    std::fs::write(path, v.to_json() + "\n")
                        .with_context(|| format!("writing {}", path.display()))?;
                    let result = json!({
                        "written": path.display().to_string(),
                        "periods": v.lattice().periods(),
                        "pattern": g.pattern.as_ref().map(|p| p.to_string()),
                        "real": v.is_real(),
                    });
                    Ok(rep("gen").emit(Outcome::Pass, result))
                }
                None => {
                    let _ = writeln!(std::io::stdout().lock(), "{}", v.to_json());
                    Ok(0)
                }
            }
        }
        Command::Dft { input } => {
            let v = read(input)?;
            let t = v.dft();
            let result = json!({
                "periods": v.lattice().periods(),
                "coeffs": values_json(t.coeffs()),
            });
            Ok(rep("dft").emit(Outcome::Pass, result))
        }
        Command::Sep(SepCommand::Check { pattern, input }) => {
            let v = read(input)?;
            let chk = separability::check(&v.dft(), pattern, cli.tol)?;
            let out = if chk.pass { Outcome::Pass } else { Outcome::Fail };
            let result = json!({ "pattern": pattern.to_string(), "check": chk });
            Ok(rep("sep check").emit(out, result))
        }
        Command::Sep(SepCommand::Decompose { pattern, input }) => {
            let v = read(input)?;
            let dec = separability::decompose(&v, pattern, cli.tol)?;
            let recon = separability::verify_decomposition(&v, &dec, cli.tol)?;
            let components: Vec<_> = dec
                .components
                .iter()
                .map(|c| {
                    json!({
                        "coords": c.coords.iter().map(|x| x + 1).collect::<Vec<_>>(),
                        "periods": c.values.lattice().periods(),
                        "values": values_json(c.values.values()),
                    })
                })
                .collect();
            let out = if recon.pass { Outcome::Pass } else { Outcome::Fail };
            let result = json!({
                "pattern": pattern.to_string(),
                "components": components,
                "reconstruction": recon,
            });
            Ok(rep("sep decompose").emit(out, result))
        }
        Command::Charpoly { lambda0, input } => {
            let v = read(input)?;
            let interp = laurent::fermi_polynomial(&v, *lambda0)?;
            let poly: serde_json::Value = serde_json::from_str(&interp.poly.to_json()).expect("valid json");
            let result = json!({
                "lambda0": [lambda0.re, lambda0.im],
                "poly": poly,
                "fresh_residual": interp.residual,
                "sample_scale": interp.scale,
            });
            Ok(rep("charpoly").emit(Outcome::Pass, result))
        }
        Command::Eig { k, input } => {
            let v = read(input)?;
            if k.len() != v.lattice().dim() {
                return Err(anyhow!("--k needs {} values, got {}", v.lattice().dim(), k.len()).into());
            }
            let m = floquet::build_dv_real(&v, k)?;
            let mut ev = floquet::eigenvalues(m.matrix());
            ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            let result = json!({
                "k": k,
                "eigenvalues": values_json(&ev),
                "hermiticity_residual": m.hermiticity_residual(),
            });
            Ok(rep("eig").emit(Outcome::Pass, result))
        }
        Command::Iso(IsoCommand::Check { mode, spectral, method, v, y }) => {
            let (v, y) = (read(v)?, read(y)?);
            let spec = build_spec(*mode, spectral, &v, &y)?;
            let method = match method {
                CliMethod::Certify => Method::CertifiedGrid,
                CliMethod::Random => Method::Randomized,
            };
            let r = isospectral::certify(&v, &y, &spec, cli.tol, method, cli.seed)?;
            Ok(rep("iso check").emit(verdict_outcome(r.verdict), r))
        }
        Command::Verify(cmd) => verify(cli, cmd),
    }
}

fn verify(cli: &Cli, cmd: &VerifyCommand) -> Run<u8> {
    let tols = |conclusion: f64| Tolerances {
        certify: cli.tol,
        conclusion,
    };
    let rep = |name: &str, conclusion: Option<f64>| {
        let r = Report::new(&format!("verify {name}"), cli.seed, cli.tol);
        match conclusion {
            Some(c) => r.with_conclusion_tol(c),
            None => r,
        }
    };
    match cmd {
        VerifyCommand::AvgShift { spectral, conclusion, v, y } => {
            let (v, y) = (read(v)?, read(y)?);
            let spec = theorem_spec(spectral, &v, &y)?;
            let r = harness::verify_average_shift(&v, &y, &spec, tols(conclusion.conclusion_tol))?;
            Ok(rep("avg-shift", Some(conclusion.conclusion_tol)).emit(verdict_outcome(r.verdict), r))
        }
        VerifyCommand::SumIdentity { spectral, samples, conclusion, v, y } => {
            let (v, y) = (read(v)?, read(y)?);
            let spec = theorem_spec(spectral, &v, &y)?;
            let r = harness::verify_sum_identity(&v, &y, &spec, *samples, tols(conclusion.conclusion_tol), cli.seed)?;
            Ok(rep("sum-identity", Some(conclusion.conclusion_tol)).emit(verdict_outcome(r.verdict), r))
        }
        VerifyCommand::CoprimeDet { periods } => {
            let q: [usize; 3] = periods
                .as_slice()
                .try_into()
                .map_err(|_| anyhow!("exactly three periods are required"))?;
            let r = harness::enumerate_vanishing_determinants(q)?;
            Ok(rep("coprime-det", None).emit(verdict_outcome(r.verdict), r))
        }
        VerifyCommand::Transfer { pattern, recipe, lambda1, s, conclusion, v } => {
            let v = read(v)?;
            let d = v.lattice().dim();
            let fixed = s.as_ref().map(|_| coords(s, d)).transpose()?;
            let default = harness::default_s_map(d.max(3));
            let s_map = |a: usize, b: usize| match &fixed {
                Some(set) => set.clone(),
                None => default(a, b),
            };
            let shift = recipe.shift.unwrap_or_default();
            let r = harness::separability_transfer(
                &v,
                pattern,
                &recipe.ops,
                shift,
                *lambda1,
                &s_map,
                tols(conclusion.conclusion_tol),
            )?;
            Ok(rep("transfer", Some(conclusion.conclusion_tol)).emit(verdict_outcome(r.verdict), r))
        }
        VerifyCommand::Ambarzumian { scan, s, conclusion, v } => {
            let v = read(v)?;
            let set = s.as_ref().map(|_| coords(s, v.lattice().dim())).transpose()?;
            let scan = if scan.is_empty() { vec![Complex64::default()] } else { scan.clone() };
            let r = harness::ambarzumian_probe(&v, &scan, set, tols(conclusion.conclusion_tol))?;
            Ok(rep("ambarzumian", Some(conclusion.conclusion_tol)).emit(verdict_outcome(r.verdict), r))
        }
        VerifyCommand::ComponentFloquet {
            partition,
            lambda1,
            lambda2,
            full_premise,
            premise_points,
            conclusion,
            v,
            y,
        } => {
            let (v, y) = (read(v)?, read(y)?);
            let (sizes, shared) = args::parse_partition(partition).map_err(|e| anyhow!(e))?;
            let lambda2 = match lambda2 {
                Lambda2::Value(x) => *x,
                Lambda2::Auto => isospectral::derive_lambda2(&v, &y, *lambda1),
            };
            let mode = if *full_premise {
                PremiseMode::Full
            } else {
                PremiseMode::Randomized { points: *premise_points }
            };
            let r = harness::component_floquet(
                &v,
                &y,
                &sizes,
                shared,
                *lambda1,
                lambda2,
                mode,
                tols(conclusion.conclusion_tol),
                cli.seed,
            )?;
            Ok(rep("component-floquet", Some(conclusion.conclusion_tol)).emit(verdict_outcome(r.verdict), r))
        }
    }
}
