//! Executable checks of the isospectrality theorems: each operation certifies
//! the premise on its own, and only then tests the conclusion.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isospectral::{
    self, certify_floquet, certify_partial, derive_lambda2, IsoReport, IsoSpec, Method, Mode,
    Verdict,
};
use crate::lattice::{unit_root, PeriodLattice};
use crate::potential::{Potential, Transform};
use crate::rng::SplitMix64;
use crate::separability::{self, Pattern, SepCheck};

/// Premise certification tolerance and conclusion tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub certify: f64,
    pub conclusion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            certify: 1e-8,
            conclusion: 1e-10,
        }
    }
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn one_based(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|x| x + 1).collect()
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::HypothesisViolation(msg()))
    }
}

/// Grid-certifies a Fermi-type claim (any mode but Floquet).
fn certify_claim(v: &Potential, y: &Potential, spec: &IsoSpec, tol: f64) -> Result<IsoReport> {
    if spec.mode == Mode::Floquet {
        return Err(Error::BadSpec("a Fermi-type mode is required".into()));
    }
    isospectral::certify(v, y, spec, tol, Method::CertifiedGrid, 0)
}

/// The generalized mode matching `s`: full or partial.
fn generalized_spec(d: usize, s: Vec<usize>, lambda1: Complex64, lambda2: Complex64) -> IsoSpec {
    if s.len() == d {
        IsoSpec::generalized_fermi(d, lambda1, lambda2)
    } else {
        IsoSpec::partial(s, lambda1, lambda2)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageShiftReport {
    pub verdict: Verdict,
    pub premise: IsoReport,
    pub average_v: [f64; 2],
    pub average_y: [f64; 2],
    /// `|([V] − [Y]) − (λ₁ − λ₂)|`; absent when the premise failed.
    pub residual: Option<f64>,
    pub tol: Tolerances,
}

/// `[V] − [Y] = λ₁ − λ₂` for generalized partially Fermi isospectral pairs
/// with `#S ≥ 2`.
pub fn verify_average_shift(
    v: &Potential,
    y: &Potential,
    spec: &IsoSpec,
    tol: Tolerances,
) -> Result<AverageShiftReport> {
    let norm = spec.normalized(v.lattice().dim())?;
    require(norm.s.len() >= 2, || format!("#S = {} < 2", norm.s.len()))?;
    let premise = certify_claim(v, y, &norm, tol.certify)?;
    let (verdict, residual) = if premise.verdict.is_pass() {
        let r = ((v.average() - y.average()) - (norm.lambda1 - norm.lambda2)).norm();
        (Verdict::from_bool(r <= tol.conclusion), Some(r))
    } else {
        (Verdict::PremiseFailed, None)
    };
    Ok(AverageShiftReport {
        verdict,
        premise,
        average_v: pair(v.average()),
        average_y: pair(y.average()),
        residual,
        tol,
    })
}

/// Smallest admissible `|Σ_{j∈S} ρ^j_{n_j} z_j|` in the sum identity.
pub const DENOMINATOR_GUARD: f64 = 1e-6;
pub const MAX_RETRIES: usize = 100;

/// Both sides of the sum identity at one point `z` (indexed by `S`), with
/// `V₁ = V − λ₁`. `None` when a denominator is below the guard.
pub fn sum_identity_side(
    v: &Potential,
    lambda: Complex64,
    s: &[usize],
    z: &[Complex64],
) -> Option<Complex64> {
    let lat = v.lattice();
    let denoms: Vec<Complex64> = lat
        .points()
        .map(|n| {
            s.iter()
                .zip(z)
                .map(|(&j, &zj)| unit_root(lat.period(j), n[j] as i64) * zj)
                .sum()
        })
        .collect();
    if denoms.iter().any(|x| x.norm() < DENOMINATOR_GUARD) {
        return None;
    }
    let shifted = v.transform(&Transform::AddConstant(-lambda)).expect("same lattice");
    let weights: Vec<f64> = shifted.dft().coeffs().iter().map(|c| c.norm_sqr()).collect();
    Some(sum_with_denominators(lat, &weights, &denoms))
}

fn sum_with_denominators(lat: &PeriodLattice, weights: &[f64], denoms: &[Complex64]) -> Complex64 {
    let points: Vec<Vec<usize>> = lat.points().collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut m = vec![0usize; lat.dim()];
    for (ni, n) in points.iter().enumerate() {
        let inv_n = denoms[ni].inv();
        for (li, l) in points.iter().enumerate() {
            if weights[li] == 0.0 {
                continue;
            }
            for j in 0..m.len() {
                m[j] = (n[j] + l[j]) % lat.period(j);
            }
            total += inv_n * denoms[lat.index_unchecked(&m)].inv() * weights[li];
        }
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct SumIdentityReport {
    pub verdict: Verdict,
    pub premise: IsoReport,
    pub samples: usize,
    /// Largest `|L − R| / max(|L|, |R|)`; absent when the premise failed.
    pub max_rel_gap: Option<f64>,
    pub resampled: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

/// The `|V̂₁(l)|²` sum identity at random `z_S`, moduli uniform in `[0.5, 2]`.
pub fn verify_sum_identity(
    v: &Potential,
    y: &Potential,
    spec: &IsoSpec,
    samples: usize,
    tol: Tolerances,
    seed: u64,
) -> Result<SumIdentityReport> {
    require(v.is_real() && y.is_real(), || "V and Y must be real".into())?;
    let norm = spec.normalized(v.lattice().dim())?;
    require(norm.s.len() >= 2, || format!("#S = {} < 2", norm.s.len()))?;
    let premise = certify_claim(v, y, &norm, tol.certify)?;
    if !premise.verdict.is_pass() {
        return Ok(SumIdentityReport {
            verdict: Verdict::PremiseFailed,
            premise,
            samples,
            max_rel_gap: None,
            resampled: 0,
            seed,
            tol,
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut draws = Vec::with_capacity(samples);
    let mut resampled = 0;
    for _ in 0..samples {
        let mut found = None;
        for _ in 0..=MAX_RETRIES {
            let z: Vec<Complex64> = norm
                .s
                .iter()
                .map(|_| rng.uniform(0.5, 2.0) * rng.unit_phase())
                .collect();
            let lhs = sum_identity_side(v, norm.lambda1, &norm.s, &z);
            if let Some(lhs) = lhs {
                let rhs = sum_identity_side(y, norm.lambda2, &norm.s, &z).expect("same denominators");
                found = Some((lhs, rhs));
                break;
            }
            resampled += 1;
        }
        draws.push(found.ok_or(Error::DegenerateSampling(MAX_RETRIES))?);
    }
    let gap = draws
        .iter()
        .map(|(a, b)| {
            let scale = a.norm().max(b.norm());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).norm() / scale
            }
        })
        .fold(0.0, f64::max);
    Ok(SumIdentityReport {
        verdict: Verdict::from_bool(gap <= tol.certify),
        premise,
        samples,
        max_rel_gap: Some(gap),
        resampled,
        seed,
        tol,
    })
}

/// Which of the six listed cases an index pair `(l, l')` falls into.
pub fn vanishing_cases(l: [usize; 3], lp: [usize; 3]) -> [bool; 6] {
    let zero = |i: usize| l[i] == 0 && lp[i] == 0;
    [
        l == [0, 0, 0],
        lp == [0, 0, 0],
        l == lp,
        zero(0) && zero(1),
        zero(0) && zero(2),
        zero(1) && zero(2),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CoprimeDetReport {
    pub verdict: Verdict,
    pub periods: [usize; 3],
    pub tuples: usize,
    pub vanishing: usize,
    pub classified: usize,
    /// Vanishing tuples matching none of the cases.
    pub unclassified: usize,
    /// Tuples matching a case whose determinant is not numerically zero.
    pub nonvanishing_in_cases: usize,
    /// Vanishing tuples per case `a`–`f` (a tuple may match several).
    pub case_counts: BTreeMap<char, usize>,
    /// Smallest `|det|` among non-vanishing tuples.
    pub min_nonzero_det: f64,
    pub threshold: f64,
}

pub const VANISHING_THRESHOLD: f64 = 1e-10;

/// Exhaustive check that the `3 × 3` determinants with rows `(1,1,1)`,
/// `ρ(l)`, `ρ(l')` vanish exactly on the listed cases.
pub fn enumerate_vanishing_determinants(q: [usize; 3]) -> Result<CoprimeDetReport> {
    let lat = PeriodLattice::new(&q)?;
    let idx: Vec<Vec<usize>> = lat.points().collect();
    let rho = |l: &[usize]| -> [Complex64; 3] {
        [0, 1, 2].map(|j| unit_root(q[j], l[j] as i64))
    };
    let mut report = CoprimeDetReport {
        verdict: Verdict::Pass,
        periods: q,
        tuples: 0,
        vanishing: 0,
        classified: 0,
        unclassified: 0,
        nonvanishing_in_cases: 0,
        case_counts: ('a'..='f').map(|c| (c, 0)).collect(),
        min_nonzero_det: f64::INFINITY,
        threshold: VANISHING_THRESHOLD,
    };
    for l in &idx {
        let a = rho(l);
        for lp in &idx {
            let b = rho(lp);
            // expansion along the row of ones
            let det = (a[1] * b[2] - a[2] * b[1]) - (a[0] * b[2] - a[2] * b[0]) + (a[0] * b[1] - a[1] * b[0]);
            let cases = vanishing_cases([l[0], l[1], l[2]], [lp[0], lp[1], lp[2]]);
            let in_case = cases.iter().any(|&x| x);
            report.tuples += 1;
            if det.norm() < VANISHING_THRESHOLD {
                report.vanishing += 1;
                if in_case {
                    report.classified += 1;
                    for (c, hit) in ('a'..='f').zip(cases) {
                        if hit {
                            *report.case_counts.get_mut(&c).expect("case key") += 1;
                        }
                    }
                } else {
                    report.unclassified += 1;
                }
            } else {
                report.min_nonzero_det = report.min_nonzero_det.min(det.norm());
                if in_case {
                    report.nonvanishing_in_cases += 1;
                }
            }
        }
    }
    report.verdict = Verdict::from_bool(report.unclassified == 0 && report.nonvanishing_in_cases == 0);
    Ok(report)
}

/// `S(s, t) = {s, t, smallest other coordinate}`.
pub fn default_s_map(d: usize) -> impl Fn(usize, usize) -> Vec<usize> {
    move |s, t| {
        let extra = (0..d).find(|&c| c != s && c != t).expect("d ≥ 3");
        let mut out = vec![s, t, extra];
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairPremise {
    /// 1-based.
    pub pair: (usize, usize),
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub verdict: Verdict,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub verdict: Verdict,
    pub pattern: String,
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
    pub premises: Vec<PairPremise>,
    /// Separability of `Y`; absent when a premise failed.
    pub y_check: Option<SepCheck>,
    /// Worst offending `|Ŷ(l)|` relative to `‖V̂‖_∞`.
    pub worst_rel_to_v: Option<f64>,
    pub tol: Tolerances,
}

/// Separability of `V` carries over to a generalized partially Fermi
/// isospectral partner `Y = recipe(V) + c`, given the premise for every pair
/// the pattern involves with `#S(s,t) ≥ 3`.
pub fn separability_transfer(
    v: &Potential,
    pattern: &Pattern,
    recipe: &[Transform],
    c: Complex64,
    lambda1: Complex64,
    s_map: &dyn Fn(usize, usize) -> Vec<usize>,
    tol: Tolerances,
) -> Result<TransferReport> {
    let d = v.lattice().dim();
    require(d >= 3, || format!("d = {d} < 3"))?;
    pattern.validate(d)?;
    require(v.is_real(), || "V must be real".into())?;
    let v_check = separability::check(&v.dft(), pattern, tol.conclusion)?;
    if !v_check.pass {
        return Err(Error::NotSeparable {
            pattern: pattern.to_string(),
            worst: v_check.worst_rel,
        });
    }
    let y = v.apply_all(recipe)?.transform(&Transform::AddConstant(c))?;
    require(y.is_real(), || "the partner must be real".into())?;
    let lambda2 = derive_lambda2(v, &y, lambda1);

    let mut certified: BTreeMap<Vec<usize>, IsoReport> = BTreeMap::new();
    let mut premises = Vec::new();
    for (s, t) in pattern.required_pairs(d) {
        let mut set = s_map(s, t);
        set.sort_unstable();
        set.dedup();
        require(set.contains(&s) && set.contains(&t), || {
            format!("S({}, {}) must contain both coordinates", s + 1, t + 1)
        })?;
        require(set.len() >= 3, || format!("#S({}, {}) = {} < 3", s + 1, t + 1, set.len()))?;
        if !certified.contains_key(&set) {
            let spec = generalized_spec(d, set.clone(), lambda1, lambda2);
            certified.insert(set.clone(), certify_partial(v, &y, &spec, tol.certify)?);
        }
        let rep = &certified[&set];
        premises.push(PairPremise {
            pair: (s + 1, t + 1),
            s: one_based(&set),
            verdict: rep.verdict,
            max_rel_dev: rep.max_rel_dev,
        });
    }
    let premise_ok = premises.iter().all(|p| p.verdict.is_pass());
    let (verdict, y_check, worst_rel_to_v) = if premise_ok {
        let chk = separability::check(&y.dft(), pattern, tol.conclusion)?;
        let vnorm = v.dft().max_abs();
        let rel = if vnorm > 0.0 { chk.worst / vnorm } else { chk.worst };
        (Verdict::from_bool(chk.pass), Some(chk), Some(rel))
    } else {
        (Verdict::PremiseFailed, None, None)
    };
    Ok(TransferReport {
        verdict,
        pattern: pattern.to_string(),
        lambda1: pair(lambda1),
        lambda2: pair(lambda2),
        premises,
        y_check,
        worst_rel_to_v,
        tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub lambda1: [f64; 2],
    pub lambda2: [f64; 2],
    pub verdict: Verdict,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmbarzumianReport {
    pub verdict: Verdict,
    pub outcome: &'static str,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    /// 1-based pairs `(s, t)` with `s, t ∈ S`, the ones this scan covers.
    pub pairs_covered: Vec<(usize, usize)>,
    pub scan: Vec<ScanEntry>,
    pub any_certified: bool,
    pub constancy_residual: f64,
    pub tol: Tolerances,
}

/// Tests `V` against the constant `[V]` over a `λ₁` scan. Certification may
/// only succeed for constant `V`; the verdict is FAIL if that is contradicted.
pub fn ambarzumian_probe(
    v: &Potential,
    scan: &[Complex64],
    s: Option<Vec<usize>>,
    tol: Tolerances,
) -> Result<AmbarzumianReport> {
    let d = v.lattice().dim();
    require(d >= 3, || format!("d = {d} < 3"))?;
    require(v.is_real(), || "V must be real".into())?;
    let mut set = s.unwrap_or_else(|| vec![0, 1, 2]);
    set.sort_unstable();
    set.dedup();
    require(set.len() >= 3, || format!("#S = {} < 3", set.len()))?;
    let y = Potential::constant(v.lattice().clone(), Complex64::new(v.average().re, 0.0));
    let mut entries = Vec::with_capacity(scan.len());
    for &lambda1 in scan {
        let lambda2 = derive_lambda2(v, &y, lambda1);
        let spec = generalized_spec(d, set.clone(), lambda1, lambda2);
        let rep = certify_partial(v, &y, &spec, tol.certify)?;
        entries.push(ScanEntry {
            lambda1: pair(lambda1),
            lambda2: pair(lambda2),
            verdict: rep.verdict,
            max_rel_dev: rep.max_rel_dev,
        });
    }
    let any_certified = entries.iter().any(|e| e.verdict.is_pass());
    let residual = v.constancy_residual();
    let constant = residual <= tol.certify;
    // certification ⇒ constant, and a constant V must certify
    let consistent = if any_certified { constant } else { !constant || scan.is_empty() };
    let mut pairs_covered = Vec::new();
    for (i, &a) in set.iter().enumerate() {
        for &b in &set[i + 1..] {
            pairs_covered.push((a + 1, b + 1));
        }
    }
    Ok(AmbarzumianReport {
        verdict: Verdict::from_bool(consistent),
        outcome: "CONSISTENT-ONLY-IF-CONSTANT",
        s: one_based(&set),
        pairs_covered,
        scan: entries,
        any_certified,
        constancy_residual: residual,
        tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseMode {
    /// Random real quasi-momenta on the full torus.
    Randomized { points: usize },
    /// The full certification grid (expensive for large `Q`).
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectedComponent {
    /// 1-based block index.
    pub block: usize,
    /// 1-based coordinates of the component's sub-lattice.
    pub coords: Vec<usize>,
    pub u1: [f64; 2],
    pub u2: [f64; 2],
    /// `U_{j;1}` and `U_{j;2}` on the shared block, as `[re, im]`.
    pub corrector_v: Vec<[f64; 2]>,
    pub corrector_y: Vec<[f64; 2]>,
    #[serde(skip)]
    pub v_tilde: Potential,
    #[serde(skip)]
    pub y_tilde: Potential,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectorSet {
    pub components: Vec<CorrectedComponent>,
    /// Largest `|mean Ṽ_j|`, `|mean Ỹ_j|`.
    pub normalization_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub verdict: Verdict,
    pub partition: String,
    pub premise_mode: PremiseMode,
    pub premise: IsoReport,
    pub correctors: Option<CorrectorSet>,
    pub components: Vec<IsoReport>,
    pub tol: Tolerances,
}

/// `V_j` averaged over its block, per point of the shared block.
fn block_average(comp: &Potential, shared_volume: usize) -> Vec<Complex64> {
    let own = comp.values().len() / shared_volume;
    (0..shared_volume)
        .map(|r| (0..own).map(|a| comp.values()[a * shared_volume + r]).sum::<Complex64>() / own as f64)
        .collect()
}

/// Corrected components `V_j + U_j` with `U_j(ñ_r) = Σ_{i≠j} avg_{ñ_i} V_i + u`
/// and `u` chosen so that each corrected component has mean zero.
fn correct(dec: &separability::Decomposition, shared_volume: usize) -> Result<Vec<(Potential, Vec<Complex64>, Complex64)>> {
    let avgs: Vec<Vec<Complex64>> = dec
        .components
        .iter()
        .map(|c| block_average(&c.values, shared_volume))
        .collect();
    dec.components
        .iter()
        .enumerate()
        .map(|(j, comp)| {
            let others: Vec<Complex64> = (0..shared_volume)
                .map(|r| (0..avgs.len()).filter(|&i| i != j).map(|i| avgs[i][r]).sum())
                .collect();
            let vals = comp.values.values();
            let raw: Vec<Complex64> = (0..vals.len()).map(|i| vals[i] + others[i % shared_volume]).collect();
            let u = -raw.iter().sum::<Complex64>() / raw.len() as f64;
            let corrected = Potential::new(comp.values.lattice().clone(), raw.iter().map(|x| x + u).collect())?;
            let corrector = others.iter().map(|x| x + u).collect();
            Ok((corrected, corrector, u))
        })
        .collect()
}

/// Components of generalized Fermi isospectral `⊕`-separable potentials
/// become Floquet isospectral after the shared-block correction.
#[allow(clippy::too_many_arguments)]
pub fn component_floquet(
    v: &Potential,
    y: &Potential,
    sizes: &[usize],
    shared: usize,
    lambda1: Complex64,
    lambda2: Complex64,
    premise_mode: PremiseMode,
    tol: Tolerances,
    seed: u64,
) -> Result<ComponentReport> {
    if v.lattice() != y.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let d = v.lattice().dim();
    let pattern = Pattern::OPlus(sizes.to_vec(), shared);
    pattern.validate(d)?;
    let r = sizes.len() + 1;
    require(r >= 3, || format!("r = {r} < 3"))?;
    for (j, &dj) in sizes.iter().enumerate() {
        require(d >= dj + shared + 2, || {
            format!("d − d_{} − d_r = {} < 2", j + 1, d as i64 - dj as i64 - shared as i64)
        })?;
    }
    let dec_v = separability::decompose(v, &pattern, tol.conclusion)?;
    let dec_y = separability::decompose(y, &pattern, tol.conclusion)?;

    let spec = IsoSpec::generalized_fermi(d, lambda1, lambda2);
    let premise = match premise_mode {
        PremiseMode::Randomized { points } => {
            isospectral::certify_randomized(v, y, &spec, tol.certify, points, seed)?
        }
        PremiseMode::Full => certify_partial(v, y, &spec, tol.certify)?,
    };
    let mut report = ComponentReport {
        verdict: Verdict::PremiseFailed,
        partition: pattern.to_string(),
        premise_mode,
        premise,
        correctors: None,
        components: Vec::new(),
        tol,
    };
    if !report.premise.verdict.is_pass() {
        return Ok(report);
    }

    let shared_volume: usize = v.lattice().periods()[d - shared..].iter().product();
    let cv = correct(&dec_v, shared_volume)?;
    let cy = correct(&dec_y, shared_volume)?;
    let to_pairs = |xs: &[Complex64]| xs.iter().map(|&x| pair(x)).collect::<Vec<_>>();
    let mut comps = Vec::with_capacity(cv.len());
    let mut residual: f64 = 0.0;
    for (j, ((vt, uv, u1), (yt, uy, u2))) in cv.into_iter().zip(cy).enumerate() {
        residual = residual.max(vt.average().norm()).max(yt.average().norm());
        comps.push(CorrectedComponent {
            block: j + 1,
            coords: one_based(&dec_v.components[j].coords),
            u1: pair(u1),
            u2: pair(u2),
            corrector_v: to_pairs(&uv),
            corrector_y: to_pairs(&uy),
            v_tilde: vt,
            y_tilde: yt,
        });
    }
    report.components = comps
        .par_iter()
        .map(|c| certify_floquet(&c.v_tilde, &c.y_tilde, tol.certify))
        .collect::<Result<Vec<_>>>()?;
    report.verdict = Verdict::from_bool(report.components.iter().all(|c| c.verdict.is_pass()));
    report.correctors = Some(CorrectorSet {
        components: comps,
        normalization_residual: residual,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Kind;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lat(q: &[usize]) -> PeriodLattice {
        PeriodLattice::new(q).unwrap()
    }

    fn translate(v: &Potential, m: &[i64]) -> Potential {
        v.transform(&Transform::Translate(m.to_vec())).unwrap()
    }

    fn add(v: &Potential, x: f64) -> Potential {
        v.transform(&Transform::AddConstant(c(x))).unwrap()
    }

    #[test]
    fn average_shift_examples() {
        let v = Potential::random(lat(&[2, 3, 5]), 1, Kind::Real);
        let y = add(&translate(&v, &[1, 1, 1]), 0.3);
        let spec = IsoSpec::partial(vec![0, 1], c(0.2), c(0.5));
        let r = verify_average_shift(&v, &y, &spec, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.residual.unwrap() < 1e-10);

        let same = verify_average_shift(&v, &v, &IsoSpec::fermi(3, c(0.4)), Tolerances::default()).unwrap();
        assert_eq!(same.verdict, Verdict::Pass);
        assert_eq!(same.residual, Some(0.0));

        let shifted = add(&v, 0.3);
        let bad = IsoSpec::generalized_fermi(3, c(0.2), c(0.2));
        let r = verify_average_shift(&v, &shifted, &bad, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::PremiseFailed);
        assert!(r.residual.is_none());

        let one = IsoSpec::partial(vec![0], c(0.0), c(0.0));
        assert!(matches!(
            verify_average_shift(&v, &v, &one, Tolerances::default()),
            Err(Error::HypothesisViolation(_))
        ));
    }

    /// Direct double loop over `(n, l)` with floating phases.
    fn naive_side(v: &Potential, lambda: Complex64, s: &[usize], z: &[Complex64]) -> Complex64 {
        let lat = v.lattice();
        let q = lat.volume() as f64;
        let pts: Vec<Vec<usize>> = lat.points().collect();
        let vhat = |l: &[usize]| -> Complex64 {
            pts.iter()
                .map(|n| {
                    let ph: f64 = (0..lat.dim())
                        .map(|j| (n[j] * l[j]) as f64 / lat.period(j) as f64)
                        .sum();
                    (v.values()[lat.index_of(n).unwrap()] - lambda)
                        * Complex64::from_polar(1.0, -std::f64::consts::TAU * ph)
                })
                .sum::<Complex64>()
                / q
        };
        let den = |n: &[usize]| -> Complex64 {
            s.iter()
                .zip(z)
                .map(|(&j, &zj)| {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * n[j] as f64 / lat.period(j) as f64) * zj
                })
                .sum()
        };
        let mut total = c(0.0);
        for l in &pts {
            let w = vhat(l).norm_sqr();
            for n in &pts {
                let m: Vec<usize> = (0..lat.dim()).map(|j| n[j] + l[j]).collect();
                total += w / (den(n) * den(&m));
            }
        }
        total
    }

    #[test]
    fn sum_side_matches_naive() {
        let v = Potential::random(lat(&[2, 3]), 4, Kind::Real);
        let z = [Complex64::new(0.7, 0.4), Complex64::new(-1.2, 0.3)];
        let a = sum_identity_side(&v, c(0.3), &[0, 1], &z).unwrap();
        let b = naive_side(&v, c(0.3), &[0, 1], &z);
        assert!((a - b).norm() < 1e-12 * b.norm(), "{a} vs {b}");
        // z_1 = -z_2 with q = 1 style collision makes a denominator vanish
        let v1 = Potential::random(lat(&[2, 3]), 4, Kind::Real);
        assert!(sum_identity_side(&v1, c(0.0), &[0, 1], &[c(1.0), c(-1.0)]).is_none());
    }

    #[test]
    fn sum_identity_examples() {
        let v = Potential::random(lat(&[2, 3, 5]), 6, Kind::Real);
        let y = translate(&v, &[1, 2, 3]);
        let spec = IsoSpec::fermi(3, c(0.0));
        let r = verify_sum_identity(&v, &y, &spec, 10, Tolerances::default(), 3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.max_rel_gap.unwrap() < 1e-8);

        let same = verify_sum_identity(&v, &v, &spec, 5, Tolerances::default(), 3).unwrap();
        assert_eq!(same.max_rel_gap, Some(0.0));

        let other = Potential::random(v.lattice().clone(), 99, Kind::Real);
        let r = verify_sum_identity(&v, &other, &spec, 5, Tolerances::default(), 3).unwrap();
        assert_eq!(r.verdict, Verdict::PremiseFailed);

        let cplx = Potential::random(v.lattice().clone(), 1, Kind::Complex);
        assert!(matches!(
            verify_sum_identity(&cplx, &cplx, &spec, 1, Tolerances::default(), 0),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn coprime_determinants() {
        let cases = vanishing_cases([0, 0, 0], [0, 0, 0]);
        assert!(cases[0] && cases[1] && cases[2]);
        let cases = vanishing_cases([1, 2, 3], [1, 2, 3]);
        assert_eq!(cases, [false, false, true, false, false, false]);

        for q in [[2, 3, 5], [3, 4, 5]] {
            let r = enumerate_vanishing_determinants(q).unwrap();
            assert_eq!(r.tuples, (q[0] * q[1] * q[2]).pow(2));
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
            assert_eq!(r.unclassified, 0);
            assert_eq!(r.classified, r.vanishing);
            assert!(r.min_nonzero_det > 1e-3, "{}", r.min_nonzero_det);
        }
        assert!(matches!(
            enumerate_vanishing_determinants([2, 4, 5]),
            Err(Error::CoprimalityViolation { .. })
        ));
    }

    /// Independent count of the union of the cases by inclusion–exclusion
    /// over index tuples.
    #[test]
    fn case_union_count() {
        let q = [2usize, 3, 5];
        let r = enumerate_vanishing_determinants(q).unwrap();
        let total = q[0] * q[1] * q[2];
        // (a) ∪ (b) ∪ (c): 2Q − 1 tuples with l = 0 or l' = 0, plus Q − 1 diagonal ones
        let abc = 2 * total - 1 + (total - 1);
        // (d),(e),(f) not already counted: l, l' share two zero coordinates,
        // differ in the third, and are both nonzero
        let def: usize = (0..3).map(|j| (q[j] - 1) * (q[j] - 2)).sum();
        assert_eq!(r.vanishing, abc + def);
    }

    #[test]
    fn transfer_examples() {
        let l = lat(&[2, 3, 5]);
        let v = Potential::random_separable(l.clone(), &Pattern::Pair(0, 1), 3, Kind::Real).unwrap();
        let r = separability_transfer(
            &v,
            &Pattern::Pair(0, 1),
            &[Transform::Translate(vec![1, 2, 4])],
            c(0.5),
            c(0.1),
            &default_s_map(3),
            Tolerances::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.worst_rel_to_v.unwrap() < 1e-10);

        let blocks = Pattern::Blocks(vec![1, 1, 1]);
        let v = Potential::random_separable(l.clone(), &blocks, 8, Kind::Real).unwrap();
        let r = separability_transfer(&v, &blocks, &[Transform::Reflect], c(0.0), c(0.0), &default_s_map(3), Tolerances::default())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.premises.len(), 3);

        let k = Potential::constant(l.clone(), c(1.25));
        let r = separability_transfer(&k, &blocks, &[], c(0.0), c(0.0), &default_s_map(3), Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);

        let small = |s: usize, t: usize| vec![s, t];
        assert!(matches!(
            separability_transfer(&v, &blocks, &[], c(0.0), c(0.0), &small, Tolerances::default()),
            Err(Error::HypothesisViolation(_))
        ));
        let flat = Potential::random(lat(&[2, 3]), 1, Kind::Real);
        assert!(matches!(
            separability_transfer(&flat, &Pattern::Pair(0, 1), &[], c(0.0), c(0.0), &default_s_map(2), Tolerances::default()),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn ambarzumian_examples() {
        let l = lat(&[2, 3, 5]);
        let scan = [c(0.0), c(0.7), Complex64::new(-1.0, 0.5)];
        let k = Potential::constant(l.clone(), c(0.4));
        let r = ambarzumian_probe(&k, &scan, None, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.any_certified);
        assert_eq!(r.constancy_residual, 0.0);
        assert_eq!(r.pairs_covered, vec![(1, 2), (1, 3), (2, 3)]);

        let v = Potential::random(l.clone(), 12, Kind::Real);
        let r = ambarzumian_probe(&v, &scan, None, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(!r.any_certified);
        assert!(r.scan.iter().all(|e| e.max_rel_dev > 1e-3));

        let mut rng = SplitMix64::new(2);
        let noisy = Potential::from_fn(l.clone(), |_| c(0.4 + 1e-12 * rng.uniform(-1.0, 1.0)));
        let r = ambarzumian_probe(&noisy, &scan, None, Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.any_certified);

        let cplx = Potential::random(l, 1, Kind::Complex);
        assert!(ambarzumian_probe(&cplx, &scan, None, Tolerances::default()).is_err());
    }

    #[test]
    fn component_floquet_examples() {
        let l = lat(&[2, 3, 5, 7]);
        let pattern = Pattern::OPlus(vec![1, 1, 1], 1);
        let v = Potential::random_separable(l.clone(), &pattern, 5, Kind::Complex).unwrap();
        let y = add(&translate(&v, &[1, 2, 3, 4]), 0.7);
        let r = component_floquet(
            &v,
            &y,
            &[1, 1, 1],
            1,
            c(0.2),
            c(0.9),
            PremiseMode::Randomized { points: 8 },
            Tolerances::default(),
            1,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.components);
        assert_eq!(r.components.len(), 3);
        assert!(r.correctors.as_ref().unwrap().normalization_residual < 1e-12);

        let same = component_floquet(&v, &v, &[1, 1, 1], 1, c(0.0), c(0.0), PremiseMode::Randomized { points: 8 }, Tolerances::default(), 1)
            .unwrap();
        assert_eq!(same.verdict, Verdict::Pass);
        for comp in &same.correctors.unwrap().components {
            assert_eq!(comp.v_tilde, comp.y_tilde);
        }

        let wrong = component_floquet(&v, &y, &[1, 1, 1], 1, c(0.2), c(0.2), PremiseMode::Randomized { points: 8 }, Tolerances::default(), 1)
            .unwrap();
        assert_eq!(wrong.verdict, Verdict::PremiseFailed);

        let v3 = Potential::random_separable(lat(&[2, 3, 5]), &Pattern::OPlus(vec![1, 1], 1), 1, Kind::Real).unwrap();
        assert!(matches!(
            component_floquet(&v3, &v3, &[1, 1], 1, c(0.0), c(0.0), PremiseMode::Full, Tolerances::default(), 0),
            Err(Error::HypothesisViolation(_))
        ));
    }

    /// The corrected component is `V` averaged over the other summand blocks,
    /// minus `[V]`, whatever decomposition was used.
    #[test]
    fn corrected_component_oracle() {
        let l = lat(&[2, 3, 5, 7]);
        let pattern = Pattern::OPlus(vec![1, 1, 1], 1);
        let v = Potential::random_separable(l.clone(), &pattern, 9, Kind::Real).unwrap();
        let dec = separability::decompose(&v, &pattern, 1e-10).unwrap();
        let corrected = correct(&dec, 7).unwrap();
        let avg = v.average();
        for (j, (vt, _, _)) in corrected.iter().enumerate() {
            for (idx, m) in vt.lattice().points().enumerate() {
                let mut total = c(0.0);
                let mut count = 0.0;
                for n in l.points() {
                    if n[j] == m[0] && n[3] == m[1] {
                        total += v.values()[l.index_of(&n).unwrap()];
                        count += 1.0;
                    }
                }
                let expect = total / count - avg;
                assert!((vt.values()[idx] - expect).norm() < 1e-12);
            }
        }
    }
}
