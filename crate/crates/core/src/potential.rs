//! Γ-periodic potentials on the fundamental domain and their discrete
//! Fourier transform.
//!
//! The forward transform carries the `1/Q` factor,
//! `V̂(l) = (1/Q) Σ_{n∈W} V(n) e^{-2πi Σ_j l_j n_j / q_j}`, and the inverse
//! carries none, so the average of `V` is literally `V̂(0)`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{unit_root, PeriodLattice};
use crate::rng::SplitMix64;
use crate::separability::Pattern;

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    lattice: PeriodLattice,
    values: Vec<Complex64>,
}

/// Value distribution for random potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// i.i.d. uniform on `[-1, 1]`.
    Real,
    /// i.i.d. uniform on `[-1, 1] × [-1, 1]`.
    Complex,
}

impl Kind {
    fn draw(self, rng: &mut SplitMix64) -> Complex64 {
        match self {
            Kind::Real => Complex64::new(rng.uniform(-1.0, 1.0), 0.0),
            Kind::Complex => Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
        }
    }
}

/// Re-sampling operations producing isospectral-partner candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `W(n) = V(n + m)`.
    Translate(Vec<i64>),
    /// `W(n) = V(-n)`.
    Reflect,
    /// `W(n) = V(n) + c`.
    AddConstant(Complex64),
}

impl Potential {
    pub fn new(lattice: PeriodLattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.volume() {
            return Err(Error::LengthMismatch {
                expected: lattice.volume(),
                got: values.len(),
            });
        }
        Ok(Self { lattice, values })
    }

    pub fn from_real(lattice: PeriodLattice, values: &[f64]) -> Result<Self> {
        Self::new(lattice, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(lattice: PeriodLattice, c: Complex64) -> Self {
        let values = vec![c; lattice.volume()];
        Self { lattice, values }
    }

    pub fn from_fn(lattice: PeriodLattice, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let values = lattice.points().map(|n| f(&n)).collect();
        Self { lattice, values }
    }

    pub fn lattice(&self) -> &PeriodLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// True iff every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// `V(n)` at an arbitrary integer point, using Γ-periodicity.
    pub fn evaluate_at(&self, n: &[i64]) -> Complex64 {
        self.values[self.lattice.index_of_wrapped(n)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|V(n) - [V]|`.
    pub fn constancy_residual(&self) -> f64 {
        let avg = self.average();
        self.values.iter().map(|v| (v - avg).norm()).fold(0.0, f64::max)
    }

    /// `[V]`, accumulated relative to `V(0)` so constants are reproduced exactly.
    pub fn average(&self) -> Complex64 {
        let base = self.values[0];
        base + self.values.iter().map(|v| v - base).sum::<Complex64>() / self.values.len() as f64
    }

    pub fn dft(&self) -> FourierTable {
        FourierTable {
            lattice: self.lattice.clone(),
            coeffs: fourier_sum(&self.lattice, &self.values, -1, 1.0 / self.lattice.volume() as f64),
        }
    }

    pub fn transform(&self, op: &Transform) -> Result<Potential> {
        let d = self.lattice.dim();
        let values = match op {
            Transform::Translate(m) => {
                if m.len() != d {
                    return Err(Error::LengthMismatch {
                        expected: d,
                        got: m.len(),
                    });
                }
                self.lattice
                    .points()
                    .map(|n| {
                        let shifted: Vec<i64> =
                            n.iter().zip(m).map(|(&a, &b)| a as i64 + b).collect();
                        self.evaluate_at(&shifted)
                    })
                    .collect()
            }
            Transform::Reflect => self
                .lattice
                .points()
                .map(|n| {
                    let neg: Vec<i64> = n.iter().map(|&a| -(a as i64)).collect();
                    self.evaluate_at(&neg)
                })
                .collect(),
            Transform::AddConstant(c) => self.values.iter().map(|v| v + c).collect(),
        };
        Ok(Potential {
            lattice: self.lattice.clone(),
            values,
        })
    }

    pub fn apply_all(&self, ops: &[Transform]) -> Result<Potential> {
        ops.iter().try_fold(self.clone(), |v, op| v.transform(op))
    }

    pub fn random(lattice: PeriodLattice, seed: u64, kind: Kind) -> Self {
        let mut rng = SplitMix64::new(seed);
        let values = (0..lattice.volume()).map(|_| kind.draw(&mut rng)).collect();
        Self { lattice, values }
    }

    /// Random potential realizing `pattern`: independent random component
    /// functions on each of the pattern's coordinate supports, summed.
    pub fn random_separable(
        lattice: PeriodLattice,
        pattern: &Pattern,
        seed: u64,
        kind: Kind,
    ) -> Result<Self> {
        pattern.validate(lattice.dim())?;
        let mut rng = SplitMix64::new(seed);
        let mut values = vec![Complex64::new(0.0, 0.0); lattice.volume()];
        for coords in pattern.supports(lattice.dim()) {
            let sub = lattice.sub_lattice(&coords)?;
            let table: Vec<Complex64> = (0..sub.volume()).map(|_| kind.draw(&mut rng)).collect();
            for (idx, n) in lattice.points().enumerate() {
                let proj: Vec<usize> = coords.iter().map(|&c| n[c]).collect();
                values[idx] += table[sub.index_unchecked(&proj)];
            }
        }
        Ok(Self { lattice, values })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PotentialFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PotentialFile::from(self)).expect("potential serializes")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// `Σ_{n∈W} x(n) e^{sign·2πi Σ_j l_j n_j/q_j}` for every `l`, times `scale`.
///
/// The phase is reduced exactly over the common denominator `Q`, so each
/// term uses a tabulated `Q`-th root of unity.
fn fourier_sum(lat: &PeriodLattice, x: &[Complex64], sign: i64, scale: f64) -> Vec<Complex64> {
    let q_total = lat.volume();
    let table: Vec<Complex64> = (0..q_total as i64).map(|r| unit_root(q_total, r)).collect();
    let weights: Vec<usize> = lat.periods().iter().map(|q| q_total / q).collect();
    let points: Vec<Vec<usize>> = lat.points().collect();
    points
        .iter()
        .map(|l| {
            let acc: Complex64 = points
                .iter()
                .zip(x)
                .map(|(n, v)| {
                    let mut r = 0usize;
                    for j in 0..l.len() {
                        r = (r + l[j] * n[j] % lat.period(j) * weights[j]) % q_total;
                    }
                    let r = if sign < 0 { (q_total - r) % q_total } else { r };
                    v * table[r]
                })
                .sum();
            acc * scale
        })
        .collect()
}

/// Fourier coefficients `V̂(l)` indexed like the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    lattice: PeriodLattice,
    coeffs: Vec<Complex64>,
}

impl FourierTable {
    pub fn new(lattice: PeriodLattice, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.volume() {
            return Err(Error::LengthMismatch {
                expected: lattice.volume(),
                got: coeffs.len(),
            });
        }
        Ok(Self { lattice, coeffs })
    }

    pub fn lattice(&self) -> &PeriodLattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `V̂(l)` with `l` reduced mod Γ.
    pub fn at(&self, l: &[i64]) -> Complex64 {
        self.coeffs[self.lattice.index_of_wrapped(l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn idft(&self) -> Potential {
        Potential {
            lattice: self.lattice.clone(),
            values: fourier_sum(&self.lattice, &self.coeffs, 1, 1.0),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialFile {
    periods: Vec<usize>,
    values: Vec<[f64; 2]>,
}

impl From<&Potential> for PotentialFile {
    fn from(v: &Potential) -> Self {
        Self {
            periods: v.lattice.periods().to_vec(),
            values: v.values.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<PotentialFile> for Potential {
    type Error = Error;

    fn try_from(file: PotentialFile) -> Result<Self> {
        let lattice = PeriodLattice::new(&file.periods)?;
        let values = file.values.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Potential::new(lattice, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lat(q: &[usize]) -> PeriodLattice {
        PeriodLattice::new(q).unwrap()
    }

    /// Direct double sum with floating phases; independent of `fourier_sum`.
    fn naive_dft(v: &Potential) -> Vec<Complex64> {
        let l = v.lattice();
        let pts: Vec<Vec<usize>> = l.points().collect();
        pts.iter()
            .map(|k| {
                pts.iter()
                    .zip(v.values())
                    .map(|(n, x)| {
                        let phase: f64 = (0..l.dim())
                            .map(|j| (k[j] * n[j]) as f64 / l.period(j) as f64)
                            .sum();
                        x * Complex64::from_polar(1.0, -TAU * phase)
                    })
                    .sum::<Complex64>()
                    / l.volume() as f64
            })
            .collect()
    }

    #[test]
    fn dft_of_constant_and_single_mode() {
        let v = Potential::constant(lat(&[2, 3]), c(2.5, 0.0));
        let f = v.dft();
        assert!((f.coeffs()[0] - 2.5).norm() < 1e-15);
        assert!(f.coeffs()[1..].iter().all(|x| x.norm() < 1e-15));

        let v = Potential::from_fn(lat(&[2, 3]), |n| c(if n[0] == 0 { 1.0 } else { -1.0 }, 0.0));
        let f = v.dft();
        for (i, x) in f.coeffs().iter().enumerate() {
            let expect = if i == f.lattice().index_of(&[1, 0]).unwrap() { 1.0 } else { 0.0 };
            assert!((x - expect).norm() < 1e-15, "coeff {i} = {x}");
        }
        assert!(v.average().norm() < 1e-15);
    }

    #[test]
    fn dft_matches_direct_sum() {
        let v = Potential::random(lat(&[2, 3, 5]), 11, Kind::Complex);
        let fast = v.dft();
        let slow = naive_dft(&v);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((v.average() - fast.coeffs()[0]).norm() < 1e-12);
        let direct: Complex64 = v.values().iter().sum::<Complex64>() / 30.0;
        assert!((v.average() - direct).norm() < 1e-15);
    }

    #[test]
    fn idft_examples() {
        let l = lat(&[2, 3, 5]);
        let mut coeffs = vec![c(0.0, 0.0); 30];
        coeffs[0] = c(1.5, -0.5);
        let v = FourierTable::new(l.clone(), coeffs).unwrap().idft();
        assert!(v.values().iter().all(|x| (x - c(1.5, -0.5)).norm() < 1e-14));

        let zero = FourierTable::new(l.clone(), vec![c(0.0, 0.0); 30]).unwrap().idft();
        assert!(zero.values().iter().all(|x| x.norm() == 0.0));

        let v = Potential::random(l, 5, Kind::Real);
        let back = v.dft().idft();
        let err = v
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-11);
    }

    #[test]
    fn transforms() {
        let l = lat(&[2, 3, 5]);
        let v = Potential::random(l.clone(), 3, Kind::Real);
        let same = v.transform(&Transform::Translate(vec![2, 3, 5])).unwrap();
        assert_eq!(same, v);

        let lam = c(0.7, 0.2);
        let shifted = v.transform(&Transform::AddConstant(-lam)).unwrap();
        let (f, g) = (v.dft(), shifted.dft());
        for i in 0..30 {
            let delta = if i == 0 { lam } else { c(0.0, 0.0) };
            assert!((g.coeffs()[i] - (f.coeffs()[i] - delta)).norm() < 1e-14);
        }

        let r = v.transform(&Transform::Reflect).unwrap();
        assert_eq!(r.evaluate_at(&[1, 2, 3]), v.evaluate_at(&[-1, -2, -3]));
        assert!(v.transform(&Transform::Translate(vec![1])).is_err());
    }

    #[test]
    fn random_generators() {
        let l = lat(&[2, 3, 5]);
        assert_eq!(Potential::random(l.clone(), 8, Kind::Real), Potential::random(l.clone(), 8, Kind::Real));
        assert_ne!(Potential::random(l.clone(), 8, Kind::Real), Potential::random(l.clone(), 9, Kind::Real));
        let v = Potential::random(l.clone(), 42, Kind::Real);
        assert!(v.is_real());
        assert!(v.average().re.abs() <= 1.0);
        let w = Potential::random(l, 42, Kind::Complex);
        assert!(!w.is_real());
        assert!(w.values().iter().all(|x| x.re.abs() <= 1.0 && x.im.abs() <= 1.0));
    }

    #[test]
    fn random_separable_pair_has_fourier_zeros() {
        let l = lat(&[2, 3, 5]);
        let v = Potential::random_separable(l.clone(), &Pattern::Pair(0, 1), 4, Kind::Real).unwrap();
        let f = v.dft();
        for (i, n) in l.points().enumerate() {
            if n[0] != 0 && n[1] != 0 {
                assert!(f.coeffs()[i].norm() < 1e-14);
            }
        }
        assert!(Potential::random_separable(l, &Pattern::Pair(0, 3), 4, Kind::Real).is_err());
    }

    #[test]
    fn json_round_trip_and_length_check() {
        let v = Potential::random(lat(&[2, 3]), 1, Kind::Complex);
        let back = Potential::from_json(&v.to_json()).unwrap();
        assert_eq!(back, v);
        let bad = r#"{"periods":[2,3],"values":[[1,0],[2,0]]}"#;
        assert_eq!(
            Potential::from_json(bad),
            Err(Error::LengthMismatch { expected: 6, got: 2 })
        );
        assert!(matches!(
            Potential::from_json(r#"{"periods":[2,4],"values":[]}"#),
            Err(Error::CoprimalityViolation { .. })
        ));
    }
}
