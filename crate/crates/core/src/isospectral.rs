//! Certification of Floquet, Fermi and (generalized, partial) Fermi
//! isospectrality, and generation of candidate isospectral partners.
//!
//! `P_V(k, λ)` is a Laurent polynomial in `e^{2πik_j}` of degree at most
//! `Q/q_j`, so agreement on a tensor grid of `2Q/q_j + 1` uniform `k_j` per
//! coordinate certifies the identity for every real `k`, and therefore for
//! every `k ∈ ℂ^d` as well.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, build_dv_real};
use crate::lattice::{unit_root, PeriodLattice};
use crate::linalg;
use crate::potential::{Potential, Transform};
use crate::rng::SplitMix64;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const RANDOM_TRIALS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Floquet,
    Fermi,
    PartialFermi,
    GeneralizedPartialFermi,
    GeneralizedFermi,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Floquet => "floquet",
            Mode::Fermi => "fermi",
            Mode::PartialFermi => "partial_fermi",
            Mode::GeneralizedPartialFermi => "generalized_partial_fermi",
            Mode::GeneralizedFermi => "generalized_fermi",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "floquet" => Mode::Floquet,
            "fermi" => Mode::Fermi,
            "partial" | "partial_fermi" => Mode::PartialFermi,
            "genpartial" | "generalized_partial_fermi" => Mode::GeneralizedPartialFermi,
            "genfermi" | "generalized_fermi" => Mode::GeneralizedFermi,
            _ => return Err(Error::BadSpec(format!("unknown mode {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "certified-grid")]
    CertifiedGrid,
    #[serde(rename = "randomized")]
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// A theorem's premise did not certify, so its conclusion was not tested.
    PremiseFailed,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// An isospectrality claim. Coordinates are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoSpec {
    pub mode: Mode,
    /// Coordinates along which `k` varies.
    pub s: Vec<usize>,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// Frozen `k_j*` for `j ∉ S`; missing entries mean `0`.
    pub fixed_k: BTreeMap<usize, f64>,
}

impl IsoSpec {
    pub fn floquet(d: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::new(Mode::Floquet, (0..d).collect(), zero, zero)
    }

    pub fn fermi(d: usize, lambda0: Complex64) -> Self {
        Self::new(Mode::Fermi, (0..d).collect(), lambda0, lambda0)
    }

    pub fn generalized_fermi(d: usize, lambda1: Complex64, lambda2: Complex64) -> Self {
        Self::new(Mode::GeneralizedFermi, (0..d).collect(), lambda1, lambda2)
    }

    /// Generalized partial Fermi isospectrality along `s` with `k_j* = 0`.
    pub fn partial(s: Vec<usize>, lambda1: Complex64, lambda2: Complex64) -> Self {
        Self::new(Mode::GeneralizedPartialFermi, s, lambda1, lambda2)
    }

    pub fn new(mode: Mode, s: Vec<usize>, lambda1: Complex64, lambda2: Complex64) -> Self {
        Self {
            mode,
            s,
            lambda1,
            lambda2,
            fixed_k: BTreeMap::new(),
        }
    }

    pub fn with_fixed(mut self, j: usize, k: f64) -> Self {
        self.fixed_k.insert(j, k);
        self
    }

    /// Checks the invariants for dimension `d`, returning the spec with `S`
    /// sorted and every frozen coordinate filled in.
    pub fn normalized(&self, d: usize) -> Result<IsoSpec> {
        let mut s = self.s.clone();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(Error::BadSpec("S is empty".into()));
        }
        if s.len() != self.s.len() {
            return Err(Error::BadSpec("S has repeated coordinates".into()));
        }
        if let Some(&j) = s.iter().find(|&&j| j >= d) {
            return Err(Error::BadSpec(format!("coordinate {} exceeds d = {d}", j + 1)));
        }
        if let Some(&j) = self.fixed_k.keys().find(|j| s.contains(j) || **j >= d) {
            return Err(Error::BadSpec(format!(
                "k_{} cannot be frozen: it lies in S or beyond d",
                j + 1
            )));
        }
        if !self.fixed_k.values().all(|k| k.is_finite()) {
            return Err(Error::BadSpec("frozen k values must be finite".into()));
        }
        let full = s.len() == d;
        match self.mode {
            Mode::Floquet | Mode::Fermi | Mode::GeneralizedFermi if !full => {
                return Err(Error::BadSpec(format!("mode {} requires S = all coordinates", self.mode)));
            }
            Mode::Fermi | Mode::PartialFermi if self.lambda1 != self.lambda2 => {
                return Err(Error::BadSpec(format!("mode {} requires λ₂ = λ₁", self.mode)));
            }
            _ => {}
        }
        let fixed_k = (0..d)
            .filter(|j| !s.contains(j))
            .map(|j| (j, self.fixed_k.get(&j).copied().unwrap_or(0.0)))
            .collect();
        Ok(IsoSpec {
            mode: self.mode,
            s,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            fixed_k,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoReport {
    pub verdict: Verdict,
    pub mode: Mode,
    /// 1-based, as on the command line.
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    /// 1-based coordinate ↦ frozen `k_j*`.
    pub fixed_k: BTreeMap<usize, f64>,
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
    pub max_rel_dev: f64,
    pub tol: f64,
    pub method: Method,
    /// Grid sizes along `S`, or `[trials]` for the randomized method.
    pub grid: Vec<usize>,
    pub seed: Option<u64>,
    /// `|([V] − [Y]) − (λ₁ − λ₂)|`, reported for passing claims with `#S ≥ 2`
    /// in the Fermi-type modes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub average_shift_residual: Option<f64>,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// `λ₂ = λ₁ − [V] + [Y]`, the only value compatible with generalized
/// partial Fermi isospectrality when `#S ≥ 2`.
pub fn derive_lambda2(v: &Potential, y: &Potential, lambda1: Complex64) -> Complex64 {
    lambda1 - v.average() + y.average()
}

fn same_lattice(v: &Potential, y: &Potential) -> Result<()> {
    if v.lattice() != y.lattice() {
        return Err(Error::LatticeMismatch);
    }
    Ok(())
}

/// Grid sizes `2Q/q_j + 1` for `j ∈ S`.
pub fn grid_sizes(lat: &PeriodLattice, s: &[usize]) -> Vec<usize> {
    s.iter().map(|&j| 2 * lat.volume() / lat.period(j) + 1).collect()
}

/// Real quasi-momenta of the certification grid for a normalized spec.
fn grid_points(lat: &PeriodLattice, spec: &IsoSpec) -> (Vec<Vec<f64>>, Vec<usize>) {
    let sizes = grid_sizes(lat, &spec.s);
    let total: usize = sizes.iter().product();
    let points = (0..total)
        .map(|mut idx| {
            let mut k = vec![0.0; lat.dim()];
            for (&j, &v) in &spec.fixed_k {
                k[j] = v;
            }
            for (pos, &j) in spec.s.iter().enumerate().rev() {
                k[j] = (idx % sizes[pos]) as f64 / sizes[pos] as f64;
                idx /= sizes[pos];
            }
            k
        })
        .collect();
    (points, sizes)
}

fn random_points(lat: &PeriodLattice, spec: &IsoSpec, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    (0..trials)
        .map(|_| {
            let mut k = vec![0.0; lat.dim()];
            for (&j, &v) in &spec.fixed_k {
                k[j] = v;
            }
            for &j in &spec.s {
                k[j] = rng.next_f64();
            }
            k
        })
        .collect()
}

/// Largest `|P_V(k,λ₁) − P_Y(k,λ₂)|` over `points`, relative to the largest
/// `|P|` seen.
fn fermi_deviation(v: &Potential, y: &Potential, spec: &IsoSpec, points: &[Vec<f64>]) -> f64 {
    let values: Vec<(Complex64, Complex64)> = points
        .par_iter()
        .map(|k| {
            (
                floquet::p_v(v, k, spec.lambda1).expect("grid point is valid"),
                floquet::p_v(y, k, spec.lambda2).expect("grid point is valid"),
            )
        })
        .collect();
    let scale = values
        .iter()
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max);
    let gap = values.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if gap == 0.0 {
        0.0
    } else {
        gap / scale
    }
}

/// `c_m R^m` for `det(M − λI) = Σ c_m λ^m`: the DFT of the samples on the
/// circle `|λ| = R`, free of the `R^{-m}` amplification.
fn scaled_charpoly(m: &linalg::CMatrix, r: f64) -> Vec<Complex64> {
    let samples = floquet::charpoly_samples(m, r);
    let n = samples.len();
    (0..n)
        .map(|deg| {
            samples
                .iter()
                .enumerate()
                .map(|(t, x)| x * unit_root(n, -((t * deg) as i64)))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Worst per-node relative gap between the characteristic polynomials in `λ`
/// of `D_V(k)` and `D_Y(k)`.
fn floquet_deviation(v: &Potential, y: &Potential, points: &[Vec<f64>]) -> f64 {
    let r = floquet::natural_radius(v).max(floquet::natural_radius(y));
    points
        .par_iter()
        .map(|k| {
            let a = scaled_charpoly(build_dv_real(v, k).expect("valid k").matrix(), r);
            let b = scaled_charpoly(build_dv_real(y, k).expect("valid k").matrix(), r);
            let scale = a.iter().chain(&b).map(|x| x.norm()).fold(0.0, f64::max);
            let gap = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            if gap == 0.0 {
                0.0
            } else {
                gap / scale
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

fn report(
    v: &Potential,
    y: &Potential,
    spec: &IsoSpec,
    dev: f64,
    tol: f64,
    method: Method,
    grid: Vec<usize>,
    seed: Option<u64>,
) -> IsoReport {
    let pass = dev <= tol;
    let shift = (pass && spec.mode != Mode::Floquet && spec.s.len() >= 2).then(|| {
        ((v.average() - y.average()) - (spec.lambda1 - spec.lambda2)).norm()
    });
    IsoReport {
        verdict: Verdict::from_bool(pass),
        mode: spec.mode,
        s: spec.s.iter().map(|j| j + 1).collect(),
        fixed_k: spec.fixed_k.iter().map(|(j, k)| (j + 1, *k)).collect(),
        lambda1: pair(spec.lambda1),
        lambda2: pair(spec.lambda2),
        max_rel_dev: dev,
        tol,
        method,
        grid,
        seed,
        average_shift_residual: shift,
    }
}

/// Fermi isospectrality at `λ₀` on the full certification grid.
pub fn certify_fermi(v: &Potential, y: &Potential, lambda0: Complex64, tol: f64) -> Result<IsoReport> {
    same_lattice(v, y)?;
    certify_grid(v, y, &IsoSpec::fermi(v.lattice().dim(), lambda0), tol)
}

/// Floquet isospectrality: equal characteristic polynomials in `λ` at every
/// node of the certification grid.
pub fn certify_floquet(v: &Potential, y: &Potential, tol: f64) -> Result<IsoReport> {
    same_lattice(v, y)?;
    certify_grid(v, y, &IsoSpec::floquet(v.lattice().dim()), tol)
}

/// `P_V(k, λ₁) = P_Y(k, λ₂)` with `k_j = k_j*` frozen off `S`.
pub fn certify_partial(v: &Potential, y: &Potential, spec: &IsoSpec, tol: f64) -> Result<IsoReport> {
    same_lattice(v, y)?;
    if matches!(spec.mode, Mode::Floquet | Mode::Fermi) {
        return Err(Error::BadSpec(format!(
            "mode {} is not a partial or generalized mode",
            spec.mode
        )));
    }
    certify_grid(v, y, spec, tol)
}

fn certify_grid(v: &Potential, y: &Potential, spec: &IsoSpec, tol: f64) -> Result<IsoReport> {
    let spec = spec.normalized(v.lattice().dim())?;
    let (points, sizes) = grid_points(v.lattice(), &spec);
    let dev = match spec.mode {
        Mode::Floquet => floquet_deviation(v, y, &points),
        _ => fermi_deviation(v, y, &spec, &points),
    };
    Ok(report(v, y, &spec, dev, tol, Method::CertifiedGrid, sizes, None))
}

/// The same claim tested at `trials` random quasi-momenta instead of the grid.
pub fn certify_randomized(
    v: &Potential,
    y: &Potential,
    spec: &IsoSpec,
    tol: f64,
    trials: usize,
    seed: u64,
) -> Result<IsoReport> {
    same_lattice(v, y)?;
    let spec = spec.normalized(v.lattice().dim())?;
    let trials = trials.max(1);
    let points = random_points(v.lattice(), &spec, trials, seed);
    let dev = match spec.mode {
        Mode::Floquet => floquet_deviation(v, y, &points),
        _ => fermi_deviation(v, y, &spec, &points),
    };
    Ok(report(v, y, &spec, dev, tol, Method::Randomized, vec![trials], Some(seed)))
}

/// Dispatches on mode and method.
pub fn certify(
    v: &Potential,
    y: &Potential,
    spec: &IsoSpec,
    tol: f64,
    method: Method,
    seed: u64,
) -> Result<IsoReport> {
    match method {
        Method::Randomized => certify_randomized(v, y, spec, tol, RANDOM_TRIALS, seed),
        Method::CertifiedGrid => {
            same_lattice(v, y)?;
            certify_grid(v, y, spec, tol)
        }
    }
}

/// `Y = recipe(V) + c` with the claim it is expected to satisfy: Floquet
/// isospectrality when the total constant shift is zero, generalized Fermi
/// isospectrality with `λ₂ = λ₁ + shift` otherwise. The claim still has to
/// be certified.
pub fn make_isospectral_partner(
    v: &Potential,
    recipe: &[Transform],
    c: Complex64,
    lambda1: Complex64,
) -> Result<(Potential, IsoSpec)> {
    let y = v.apply_all(recipe)?.transform(&Transform::AddConstant(c))?;
    let shift = c + recipe
        .iter()
        .filter_map(|t| match t {
            Transform::AddConstant(x) => Some(*x),
            _ => None,
        })
        .sum::<Complex64>();
    let d = v.lattice().dim();
    let spec = if shift == Complex64::new(0.0, 0.0) {
        IsoSpec::floquet(d)
    } else {
        IsoSpec::generalized_fermi(d, lambda1, lambda1 + shift)
    };
    Ok((y, spec))
}
