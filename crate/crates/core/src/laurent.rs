//! Dense multivariate Laurent polynomials with per-variable exponent boxes,
//! recovered from point samples by tensor-grid DFT interpolation, and
//! randomized identity testing on the unit torus.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet;
use crate::lattice::unit_root;
use crate::potential::Potential;
use crate::rng::SplitMix64;

/// Global phase applied to every interpolation node so that grids avoid
/// structured zeros of determinant evaluators.
pub const GRID_PHASE: f64 = 0.123456789;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    bounds: Vec<(i64, i64)>,
    /// Row-major over the exponent box, first variable slowest.
    coeffs: Vec<Complex64>,
}

fn box_sizes(bounds: &[(i64, i64)]) -> Vec<usize> {
    bounds.iter().map(|(lo, hi)| (hi - lo + 1) as usize).collect()
}

fn validate_bounds(bounds: &[(i64, i64)]) -> Result<()> {
    if bounds.iter().any(|(lo, hi)| lo > hi) {
        return Err(Error::Parse(format!("empty exponent range in {bounds:?}")));
    }
    Ok(())
}

/// Unflatten a row-major index over a box of the given sizes.
fn unflatten(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for j in (0..sizes.len()).rev() {
        out[j] = idx % sizes[j];
        idx /= sizes[j];
    }
    out
}

impl LaurentPoly {
    pub fn new(bounds: Vec<(i64, i64)>, coeffs: Vec<Complex64>) -> Result<Self> {
        validate_bounds(&bounds)?;
        let volume: usize = box_sizes(&bounds).iter().product();
        if coeffs.len() != volume {
            return Err(Error::LengthMismatch {
                expected: volume,
                got: coeffs.len(),
            });
        }
        Ok(Self { bounds, coeffs })
    }

    pub fn zero(vars: usize) -> Self {
        Self {
            bounds: vec![(0, 0); vars],
            coeffs: vec![ZERO],
        }
    }

    /// Builds a polynomial from `(exponents, coefficient)` terms; the box is
    /// the tightest one containing every exponent.
    pub fn from_terms(vars: usize, terms: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        if terms.is_empty() {
            return Ok(Self::zero(vars));
        }
        let mut bounds = vec![(i64::MAX, i64::MIN); vars];
        for (e, _) in terms {
            if e.len() != vars {
                return Err(Error::VariableMismatch(vars, e.len()));
            }
            for (b, &x) in bounds.iter_mut().zip(e) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        let mut p = Self {
            coeffs: vec![ZERO; box_sizes(&bounds).iter().product()],
            bounds,
        };
        for (e, c) in terms {
            let idx = p.index_of(e).expect("inside box");
            p.coeffs[idx] += c;
        }
        Ok(p)
    }

    pub fn vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(i64, i64)] {
        &self.bounds
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn index_of(&self, e: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (&x, &(lo, hi)) in e.iter().zip(&self.bounds) {
            if x < lo || x > hi {
                return None;
            }
            idx = idx * (hi - lo + 1) as usize + (x - lo) as usize;
        }
        Some(idx)
    }

    /// Coefficient of `z^e` (zero outside the box).
    pub fn coeff(&self, e: &[i64]) -> Complex64 {
        self.index_of(e).map_or(ZERO, |i| self.coeffs[i])
    }

    /// `(exponent, coefficient)` pairs over the whole box.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        let sizes = box_sizes(&self.bounds);
        self.coeffs.iter().enumerate().map(move |(i, &c)| {
            let offs = unflatten(i, &sizes);
            let e = offs
                .iter()
                .zip(&self.bounds)
                .map(|(&o, &(lo, _))| lo + o as i64)
                .collect();
            (e, c)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Nested Horner evaluation, innermost variable first.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.vars() {
            return Err(Error::VariableMismatch(self.vars(), z.len()));
        }
        if z.iter().any(|x| *x == ZERO) {
            return Err(Error::ZeroPoint);
        }
        let sizes = box_sizes(&self.bounds);
        let mut buf = self.coeffs.clone();
        for j in (0..self.vars()).rev() {
            let width = sizes[j];
            let shift = z[j].powi(self.bounds[j].0 as i32);
            buf = buf
                .chunks_exact(width)
                .map(|chunk| chunk.iter().rev().fold(ZERO, |acc, c| acc * z[j] + c) * shift)
                .collect();
        }
        Ok(buf[0])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&LaurentFile::from(self)).expect("polynomial serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LaurentFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let bounds: Vec<(i64, i64)> = file.bounds.iter().map(|b| (b[0], b[1])).collect();
        validate_bounds(&bounds)?;
        let mut p = Self {
            coeffs: vec![ZERO; box_sizes(&bounds).iter().product()],
            bounds,
        };
        for t in file.coeffs {
            let idx = p
                .index_of(&t.exp)
                .ok_or_else(|| Error::Parse(format!("exponent {:?} outside bounds", t.exp)))?;
            p.coeffs[idx] = Complex64::new(t.re, t.im);
        }
        Ok(p)
    }
}

/// Coefficients at or below this magnitude are omitted from JSON dumps.
pub const JSON_CUTOFF: f64 = 1e-12;

#[derive(Serialize, Deserialize)]
struct LaurentFile {
    bounds: Vec<[i64; 2]>,
    coeffs: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    exp: Vec<i64>,
    re: f64,
    im: f64,
}

impl From<&LaurentPoly> for LaurentFile {
    fn from(p: &LaurentPoly) -> Self {
        Self {
            bounds: p.bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            coeffs: p
                .terms()
                .filter(|(_, c)| c.norm() > JSON_CUTOFF)
                .map(|(exp, c)| TermFile {
                    exp,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InterpolationOptions {
    /// Fresh random torus points used for the residual check.
    pub check_points: usize,
    /// Largest admissible fresh-point residual, relative to the largest
    /// sample magnitude.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for InterpolationOptions {
    fn default() -> Self {
        Self {
            check_points: 20,
            residual_tol: 1e-8,
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Interpolant {
    pub poly: LaurentPoly,
    /// Largest fresh-point residual relative to `scale`.
    pub residual: f64,
    /// Largest sample magnitude on the grid.
    pub scale: f64,
    /// The grid samples, in box order.
    pub samples: Vec<Complex64>,
}

/// Grid node `t` along an axis of `size` nodes.
fn node(size: usize, t: usize) -> Complex64 {
    unit_root(size, t as i64) * Complex64::from_polar(1.0, TAU * GRID_PHASE)
}

/// Recovers the Laurent polynomial behind `evaluator` from samples on the
/// tensor grid `z_j = e^{2πiφ} ω_j^t`, `ω_j` of order `hi_j − lo_j + 1`.
pub fn interpolate_from_samples<F>(evaluator: F, bounds: &[(i64, i64)]) -> Result<LaurentPoly>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    interpolate_with(evaluator, bounds, InterpolationOptions::default()).map(|i| i.poly)
}

pub fn interpolate_with<F>(
    evaluator: F,
    bounds: &[(i64, i64)],
    opts: InterpolationOptions,
) -> Result<Interpolant>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    validate_bounds(bounds)?;
    let sizes = box_sizes(bounds);
    let volume: usize = sizes.iter().product();
    let samples: Vec<Complex64> = (0..volume)
        .into_par_iter()
        .map(|i| {
            let t = unflatten(i, &sizes);
            let z: Vec<Complex64> = t.iter().zip(&sizes).map(|(&t, &n)| node(n, t)).collect();
            evaluator(&z)
        })
        .collect();
    let scale = samples.iter().map(|x| x.norm()).fold(0.0, f64::max);

    // Per-axis inverse DFT: g(e) = (1/N) Σ_t f(t) ω^{-t e}, e in lo..=hi.
    let mut buf = samples.clone();
    let mut stride = 1;
    for j in (0..sizes.len()).rev() {
        let n = sizes[j];
        let lo = bounds[j].0;
        let mut out = vec![ZERO; volume];
        let outer = volume / (n * stride);
        for a in 0..outer {
            for b in 0..stride {
                let base = a * n * stride + b;
                for (ei, e) in (lo..=bounds[j].1).enumerate() {
                    let mut acc = ZERO;
                    for t in 0..n {
                        acc += buf[base + t * stride] * unit_root(n, -(t as i64) * e);
                    }
                    out[base + ei * stride] = acc / n as f64;
                }
            }
        }
        buf = out;
        stride *= n;
    }
    // Undo the global node twist e^{2πiφ Σ e_j}.
    let mut poly = LaurentPoly {
        bounds: bounds.to_vec(),
        coeffs: buf,
    };
    let twisted: Vec<Complex64> = poly
        .terms()
        .map(|(e, c)| {
            let total: i64 = e.iter().sum();
            c * Complex64::from_polar(1.0, -TAU * GRID_PHASE * total as f64)
        })
        .collect();
    poly.coeffs = twisted;

    let mut rng = SplitMix64::new(opts.seed);
    let points: Vec<Vec<Complex64>> = (0..opts.check_points)
        .map(|_| (0..bounds.len()).map(|_| rng.unit_phase()).collect())
        .collect();
    let residual = points
        .par_iter()
        .map(|z| (poly.evaluate(z).expect("torus point") - evaluator(z)).norm())
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    if residual > opts.residual_tol {
        return Err(Error::DegreeBoundViolation { residual });
    }
    Ok(Interpolant {
        poly,
        residual,
        scale,
        samples,
    })
}

/// Exponent bounds `±Q/q_j` of `𝒫_V(·, λ)` in the Bloch phases `z_j = e^{2πik_j}`.
pub fn fermi_bounds(v: &Potential) -> Vec<(i64, i64)> {
    let lat = v.lattice();
    lat.periods()
        .iter()
        .map(|q| {
            let b = (lat.volume() / q) as i64;
            (-b, b)
        })
        .collect()
}

/// The Laurent polynomial `z ↦ 𝒫_V(z, λ₀)`.
pub fn fermi_polynomial(v: &Potential, lambda0: Complex64) -> Result<Interpolant> {
    interpolate_with(
        |z| floquet::p_v_phases(v, z, lambda0).expect("torus point is valid"),
        &fermi_bounds(v),
        InterpolationOptions::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientGap {
    pub pass: bool,
    pub gap: f64,
}

/// Coefficientwise comparison over the union of both boxes.
pub fn equal_within(p: &LaurentPoly, q: &LaurentPoly, tol: f64) -> Result<CoefficientGap> {
    if p.vars() != q.vars() {
        return Err(Error::VariableMismatch(p.vars(), q.vars()));
    }
    let mut gap: f64 = 0.0;
    for (e, c) in p.terms() {
        gap = gap.max((c - q.coeff(&e)).norm());
    }
    for (e, c) in q.terms() {
        if p.index_of(&e).is_none() {
            gap = gap.max(c.norm());
        }
    }
    let scale = 1.0 + p.max_abs().max(q.max_abs());
    Ok(CoefficientGap {
        pass: gap <= tol * scale,
        gap,
    })
}

/// A uniformly random point of the unit torus in `vars` variables.
pub fn torus_point(rng: &mut SplitMix64, vars: usize) -> Vec<Complex64> {
    (0..vars).map(|_| rng.unit_phase()).collect()
}

/// `(f(z), g(z))` at `trials` seeded torus points, evaluated in parallel.
pub fn torus_samples<F, G>(
    f: F,
    g: G,
    vars: usize,
    trials: usize,
    seed: u64,
) -> Vec<(Complex64, Complex64)>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
    G: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let mut rng = SplitMix64::new(seed);
    let points: Vec<Vec<Complex64>> = (0..trials).map(|_| torus_point(&mut rng, vars)).collect();
    points.par_iter().map(|z| (f(z), g(z))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityTest {
    pub pass: bool,
    /// Largest `|f − g| / max(|f|, |g|, scale_probe)` over the trials.
    pub max_rel_dev: f64,
    pub trials: usize,
}

/// Schwartz–Zippel-style identity test on the unit torus.
pub fn randomized_identity_test<F, G>(
    f: F,
    g: G,
    vars: usize,
    trials: usize,
    tol: f64,
    scale_probe: f64,
    seed: u64,
) -> IdentityTest
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
    G: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let trials = trials.max(1);
    let max_rel_dev = torus_samples(f, g, vars, trials, seed)
        .into_iter()
        .map(|(a, b)| {
            let scale = a.norm().max(b.norm()).max(scale_probe);
            if scale == 0.0 {
                0.0
            } else {
                (a - b).norm() / scale
            }
        })
        .fold(0.0, f64::max);
    IdentityTest {
        pass: max_rel_dev <= tol,
        max_rel_dev,
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PeriodLattice;
    use crate::potential::Kind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn interpolates_z_plus_inverse() {
        let p = interpolate_from_samples(|z| z[0] + z[0].inv(), &[(-1, 1)]).unwrap();
        assert!((p.coeff(&[1]) - 1.0).norm() < 1e-14);
        assert!((p.coeff(&[-1]) - 1.0).norm() < 1e-14);
        assert!(p.coeff(&[0]).norm() < 1e-14);
        assert!(p.evaluate(&[c(0.0, 1.0)]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn constant_and_zero() {
        let p = interpolate_from_samples(|_| c(2.0, -1.0), &[(0, 0), (0, 0)]).unwrap();
        assert_eq!(p.coeffs().len(), 1);
        assert!((p.coeffs()[0] - c(2.0, -1.0)).norm() < 1e-15);
        let z = LaurentPoly::zero(3);
        assert_eq!(z.evaluate(&[c(0.3, 0.0), c(1.0, 1.0), c(-2.0, 0.5)]).unwrap(), ZERO);
        assert_eq!(z.evaluate(&[c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5)]), Err(Error::ZeroPoint));
    }

    #[test]
    fn undersized_bounds_are_rejected() {
        let err = interpolate_from_samples(|z| z[0] + z[0].inv(), &[(0, 1)]).unwrap_err();
        assert!(matches!(err, Error::DegreeBoundViolation { .. }));
    }

    #[test]
    fn reinterpolation_is_identity() {
        let mut rng = SplitMix64::new(4);
        let terms: Vec<(Vec<i64>, Complex64)> = (0..12)
            .map(|_| {
                let e = vec![rng.below(5) as i64 - 2, rng.below(4) as i64 - 1];
                (e, c(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
            })
            .collect();
        let p = LaurentPoly::from_terms(2, &terms).unwrap();
        let q = interpolate_from_samples(|z| p.evaluate(z).unwrap(), &[(-3, 3), (-1, 2)]).unwrap();
        for (e, coeff) in q.terms() {
            assert!((coeff - p.coeff(&e)).norm() < 1e-10, "{e:?}");
        }
        // values at grid nodes are reproduced
        let node_pt = [node(7, 3), node(4, 1)];
        let direct = p.evaluate(&node_pt).unwrap();
        assert!((q.evaluate(&node_pt).unwrap() - direct).norm() < 1e-9 * direct.norm().max(1.0));
    }

    #[test]
    fn json_dump_lists_significant_terms() {
        let p = LaurentPoly::from_terms(
            2,
            &[(vec![1, -1], c(1.0, 0.5)), (vec![0, 0], c(1e-14, 0.0)), (vec![-2, 1], c(0.0, -3.0))],
        )
        .unwrap();
        let text = p.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["bounds"], serde_json::json!([[-2, 1], [-1, 1]]));
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 2);
        let back = LaurentPoly::from_json(&text).unwrap();
        assert!(equal_within(&p, &back, 1e-12).unwrap().pass);
    }

    #[test]
    fn coefficient_comparison() {
        let p = LaurentPoly::from_terms(1, &[(vec![1], c(1.0, 0.0)), (vec![-1], c(2.0, 0.0))]).unwrap();
        let same = equal_within(&p, &p, 1e-10).unwrap();
        assert!(same.pass && same.gap == 0.0);
        let bumped =
            LaurentPoly::from_terms(1, &[(vec![1], c(1.0 + 1e-8, 0.0)), (vec![-1], c(2.0, 0.0))]).unwrap();
        assert!(!equal_within(&p, &bumped, 1e-9 / 3.0).unwrap().pass);
        let wider = LaurentPoly::from_terms(1, &[(vec![1], c(1.0, 0.0)), (vec![-1], c(2.0, 0.0)), (vec![3], c(0.5, 0.0))]).unwrap();
        assert!((equal_within(&p, &wider, 1e-10).unwrap().gap - 0.5).abs() < 1e-15);
        assert_eq!(equal_within(&p, &LaurentPoly::zero(2), 1e-10), Err(Error::VariableMismatch(1, 2)));
    }

    #[test]
    fn randomized_test_examples() {
        let f = |z: &[Complex64]| z[0] * z[1] + z[1].inv();
        assert!(randomized_identity_test(f, f, 2, 32, 1e-12, 0.0, 1).pass);
        let g = |z: &[Complex64]| z[0] * z[1] + z[1].inv() + z[0].powi(2);
        let r = randomized_identity_test(f, g, 2, 32, 1e-8, 0.0, 1);
        assert!(!r.pass && r.max_rel_dev > 0.1);
    }

    #[test]
    fn fermi_polynomial_degree_bound() {
        let lat = PeriodLattice::new(&[2, 3]).unwrap();
        let v = Potential::random(lat, 3, Kind::Complex);
        let interp = fermi_polynomial(&v, c(0.4, -0.2)).unwrap();
        assert_eq!(interp.poly.bounds(), &[(-3, 3), (-2, 2)]);
        assert!(interp.residual < 1e-10);
        // tighter bounds cannot represent it
        let err = interpolate_with(
            |z| floquet::p_v_phases(&v, z, c(0.4, -0.2)).unwrap(),
            &[(-2, 2), (-2, 2)],
            InterpolationOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegreeBoundViolation { .. }));
    }

    #[test]
    fn polynomial_and_randomized_comparison_agree() {
        let mut rng = SplitMix64::new(77);
        for case in 0..100 {
            let terms: Vec<(Vec<i64>, Complex64)> = (0..6)
                .map(|_| (vec![rng.below(3) as i64 - 1, rng.below(3) as i64 - 1], c(rng.uniform(-1.0, 1.0), 0.0)))
                .collect();
            let p = LaurentPoly::from_terms(2, &terms).unwrap();
            let q = if case % 2 == 0 {
                p.clone()
            } else {
                let mut t = terms.clone();
                t.push((vec![rng.below(3) as i64 - 1, 1], c(0.5, 0.0)));
                LaurentPoly::from_terms(2, &t).unwrap()
            };
            let coeffwise = equal_within(&p, &q, 1e-9).unwrap().pass;
            let sampled = randomized_identity_test(
                |z| p.evaluate(z).unwrap(),
                |z| q.evaluate(z).unwrap(),
                2,
                32,
                1e-9,
                1.0,
                case,
            )
            .pass;
            assert_eq!(coeffwise, sampled, "case {case}");
        }
    }
}
