use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isospec::{Complex64, Pattern, Transform};

#[derive(Parser, Debug)]
#[command(name = "isospec", version, about = "Spectral analysis of periodic discrete Schrödinger operators")]
pub struct Cli {
    /// Certification tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random, random-separable, or partner potential.
    Gen(GenArgs),
    /// Discrete Fourier coefficients of a potential.
    Dft { input: PathBuf },
    /// Separability analysis.
    #[command(subcommand)]
    Sep(SepCommand),
    /// The Laurent polynomial z ↦ P_V(z, λ₀).
    Charpoly {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda0: Complex64,
        input: PathBuf,
    },
    /// Eigenvalues of D_V(k).
    Eig {
        /// Comma-separated real quasi-momenta.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k: Vec<f64>,
        input: PathBuf,
    },
    /// Isospectrality certification.
    #[command(subcommand)]
    Iso(IsoCommand),
    /// Theorem checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Comma-separated pairwise coprime periods.
    #[arg(long, value_delimiter = ',')]
    pub periods: Option<Vec<usize>>,
    /// Draw a potential separable for this pattern.
    #[arg(long, value_parser = parse_pattern)]
    pub pattern: Option<Pattern>,
    /// Complex values instead of real ones.
    #[arg(long)]
    pub complex: bool,
    /// Build a partner of this potential instead of drawing a new one.
    #[arg(long, conflicts_with_all = ["periods", "pattern"])]
    pub from: Option<PathBuf>,
    #[command(flatten)]
    pub recipe: RecipeArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RecipeArgs {
    /// Partner operation, applied in order: `translate=1,0,2`, `reflect`, `add=re,im`.
    #[arg(long = "op", value_parser = parse_transform, allow_hyphen_values = true)]
    pub ops: Vec<Transform>,
    /// Constant added after the operations.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub shift: Option<Complex64>,
}

#[derive(Subcommand, Debug)]
pub enum SepCommand {
    Check {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        input: PathBuf,
    },
    Decompose {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        input: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliMode {
    Floquet,
    Fermi,
    Partial,
    Genpartial,
    Genfermi,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliMethod {
    Certify,
    Random,
}

/// `λ₂` given explicitly or derived from the averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda2 {
    Value(Complex64),
    Auto,
}

#[derive(Args, Debug, Clone)]
pub struct SpectralArgs {
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda0: Option<Complex64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda1: Option<Complex64>,
    /// A complex value or `auto` (λ₁ − [V] + [Y]).
    #[arg(long, value_parser = parse_lambda2, allow_hyphen_values = true)]
    pub lambda2: Option<Lambda2>,
    /// 1-based coordinates along which k varies; all by default.
    #[arg(long = "S", value_delimiter = ',')]
    pub s: Option<Vec<usize>>,
    /// Frozen quasi-momentum `j=k` for a coordinate outside S (repeatable).
    #[arg(long = "fix", value_parser = parse_fix)]
    pub fix: Vec<(usize, f64)>,
}

#[derive(Subcommand, Debug)]
pub enum IsoCommand {
    Check {
        #[arg(long, value_enum)]
        mode: CliMode,
        #[command(flatten)]
        spectral: SpectralArgs,
        #[arg(long, value_enum, default_value = "certify")]
        method: CliMethod,
        v: PathBuf,
        y: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ConclusionTol {
    /// Tolerance for the theorem's conclusion.
    #[arg(long, default_value_t = 1e-10)]
    pub conclusion_tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Averages shift by λ₁ − λ₂ under generalized partial Fermi isospectrality.
    AvgShift {
        #[command(flatten)]
        spectral: SpectralArgs,
        #[command(flatten)]
        conclusion: ConclusionTol,
        v: PathBuf,
        y: PathBuf,
    },
    /// The |V̂₁(l)|² sum identity at random admissible z.
    SumIdentity {
        #[command(flatten)]
        spectral: SpectralArgs,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        conclusion: ConclusionTol,
        v: PathBuf,
        y: PathBuf,
    },
    /// Vanishing 3×3 root-of-unity determinants for three coprime periods.
    CoprimeDet {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        periods: Vec<usize>,
    },
    /// Separability carries over to an isospectral partner.
    Transfer {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[command(flatten)]
        recipe: RecipeArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
        lambda1: Complex64,
        /// Use this S for every pair instead of the default {s, t, first other}.
        #[arg(long = "S", value_delimiter = ',')]
        s: Option<Vec<usize>>,
        #[command(flatten)]
        conclusion: ConclusionTol,
        v: PathBuf,
    },
    /// Isospectrality to a constant forces constancy.
    Ambarzumian {
        /// λ₁ values to scan (repeatable).
        #[arg(long = "lambda1", value_parser = parse_complex, allow_hyphen_values = true)]
        scan: Vec<Complex64>,
        #[arg(long = "S", value_delimiter = ',')]
        s: Option<Vec<usize>>,
        #[command(flatten)]
        conclusion: ConclusionTol,
        v: PathBuf,
    },
    /// Corrected ⊕ components are Floquet isospectral.
    ComponentFloquet {
        /// Block sizes `d₁+…+d_{r−1}|d_r`, e.g. `1+1+1|1`.
        #[arg(long)]
        partition: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0")]
        lambda1: Complex64,
        #[arg(long, value_parser = parse_lambda2, allow_hyphen_values = true, default_value = "auto")]
        lambda2: Lambda2,
        /// Certify the premise on the full grid instead of random points.
        #[arg(long)]
        full_premise: bool,
        #[arg(long, default_value_t = 8)]
        premise_points: usize,
        #[command(flatten)]
        conclusion: ConclusionTol,
        v: PathBuf,
        y: PathBuf,
    },
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("not a number: {x:?}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(num(re)?, num(im)?)),
        None => Ok(Complex64::new(num(s)?, 0.0)),
    }
}

fn parse_lambda2(s: &str) -> Result<Lambda2, String> {
    if s == "auto" {
        Ok(Lambda2::Auto)
    } else {
        parse_complex(s).map(Lambda2::Value)
    }
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    s.parse().map_err(|e: isospec::Error| e.to_string())
}

fn parse_fix(s: &str) -> Result<(usize, f64), String> {
    let (j, k) = s.split_once('=').ok_or_else(|| format!("expected j=k, got {s:?}"))?;
    let j: usize = j.trim().parse().map_err(|_| format!("bad coordinate in {s:?}"))?;
    let k: f64 = k.trim().parse().map_err(|_| format!("bad value in {s:?}"))?;
    if j == 0 {
        return Err("coordinates are 1-based".into());
    }
    Ok((j - 1, k))
}

fn parse_transform(s: &str) -> Result<Transform, String> {
    match s.split_once('=') {
        None if s == "reflect" => Ok(Transform::Reflect),
        Some(("translate", m)) => m
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| format!("bad offset in {s:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Transform::Translate),
        Some(("add", c)) => parse_complex(c).map(Transform::AddConstant),
        _ => Err(format!("unknown operation {s:?}; expected translate=…, reflect, add=…")),
    }
}

/// `1+1+1|1` into summand block sizes and the shared block size.
pub fn parse_partition(s: &str) -> Result<(Vec<usize>, usize), String> {
    let pattern: Pattern = format!("oplus:{s}").parse().map_err(|e: isospec::Error| e.to_string())?;
    match pattern {
        Pattern::OPlus(sizes, shared) => Ok((sizes, shared)),
        _ => unreachable!(),
    }
}
