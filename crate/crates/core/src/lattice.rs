//! Period lattices `q₁ℤ ⊕ … ⊕ q_dℤ`, their fundamental domain `W`, and
//! multi-index bookkeeping.
//!
//! Coordinates are 0-based in the library API. Linear indices over `W` are
//! row-major with the first coordinate varying slowest:
//! `idx = ((n₀·q₁ + n₁)·q₂ + …)·q_{d-1} + n_{d-1}`. This ordering is also the
//! on-disk ordering of potential values.

use std::f64::consts::TAU;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A rectangular period lattice with pairwise coprime periods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PeriodLattice {
    periods: Vec<usize>,
    strides: Vec<usize>,
    volume: usize,
}

impl TryFrom<Vec<usize>> for PeriodLattice {
    type Error = Error;

    fn try_from(q: Vec<usize>) -> Result<Self> {
        PeriodLattice::new(&q)
    }
}

impl From<PeriodLattice> for Vec<usize> {
    fn from(lat: PeriodLattice) -> Self {
        lat.periods
    }
}

impl PeriodLattice {
    pub fn new(q: &[usize]) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyPeriods);
        }
        if let Some(pos) = q.iter().position(|&x| x == 0) {
            return Err(Error::ZeroPeriod(pos));
        }
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                if gcd(q[i], q[j]) != 1 {
                    return Err(Error::CoprimalityViolation {
                        i,
                        j,
                        qi: q[i],
                        qj: q[j],
                    });
                }
            }
        }
        let mut strides = vec![1; q.len()];
        for j in (0..q.len() - 1).rev() {
            strides[j] = strides[j + 1] * q[j + 1];
        }
        Ok(Self {
            periods: q.to_vec(),
            strides,
            volume: q.iter().product(),
        })
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    pub fn period(&self, j: usize) -> usize {
        self.periods[j]
    }

    /// `Q = ∏ q_j`, the number of sites in the fundamental domain.
    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn index_of(&self, n: &[usize]) -> Result<usize> {
        if n.len() != self.dim() || n.iter().zip(&self.periods).any(|(&a, &q)| a >= q) {
            return Err(Error::OutOfRange {
                index: n.iter().map(|&a| a as i64).collect(),
                periods: self.periods.clone(),
            });
        }
        Ok(self.index_unchecked(n))
    }

    pub(crate) fn index_unchecked(&self, n: &[usize]) -> usize {
        n.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// Linear index of an arbitrary integer point after reduction mod Γ.
    pub fn index_of_wrapped(&self, n: &[i64]) -> usize {
        debug_assert_eq!(n.len(), self.dim());
        n.iter()
            .zip(&self.periods)
            .zip(&self.strides)
            .map(|((&a, &q), s)| (a.rem_euclid(q as i64) as usize) * s)
            .sum()
    }

    pub fn multi_index_of(&self, idx: usize) -> Result<Vec<usize>> {
        if idx >= self.volume {
            return Err(Error::OutOfRange {
                index: vec![idx as i64],
                periods: self.periods.clone(),
            });
        }
        Ok(self.multi_index_unchecked(idx))
    }

    pub(crate) fn multi_index_unchecked(&self, idx: usize) -> Vec<usize> {
        self.periods
            .iter()
            .zip(&self.strides)
            .map(|(q, s)| (idx / s) % q)
            .collect()
    }

    /// All points of `W` in index order.
    pub fn points(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.volume).map(|idx| self.multi_index_unchecked(idx))
    }

    /// `e^{2πi (m mod q_j)/q_j}`.
    pub fn root_of_unity(&self, j: usize, m: i64) -> Result<Complex64> {
        let q = *self.periods.get(j).ok_or(Error::BadCoordinate(j))?;
        Ok(unit_root(q, m))
    }

    /// The lattice spanned by a subset of coordinates, in the given order.
    pub fn sub_lattice(&self, coords: &[usize]) -> Result<PeriodLattice> {
        let q = coords
            .iter()
            .map(|&c| self.periods.get(c).copied().ok_or(Error::BadCoordinate(c)))
            .collect::<Result<Vec<_>>>()?;
        PeriodLattice::new(&q)
    }
}

/// `e^{2πi (m mod q)/q}` from the reduced residue.
pub(crate) fn unit_root(q: usize, m: i64) -> Complex64 {
    let r = m.rem_euclid(q as i64);
    match (r, q) {
        (0, _) => Complex64::new(1.0, 0.0),
        (r, q) if 2 * r as usize == q => Complex64::new(-1.0, 0.0),
        (r, q) if 4 * r as usize == q => Complex64::new(0.0, 1.0),
        (r, q) if 4 * r as usize == 3 * q => Complex64::new(0.0, -1.0),
        _ => Complex64::from_polar(1.0, TAU * r as f64 / q as f64),
    }
}

/// Contiguous coordinate blocks of sizes `d₁, …, d_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockPartition {
    /// Every size must be positive unless `allow_empty_last` is set, in which
    /// case the final block may be empty.
    pub(crate) fn build(sizes: &[usize], allow_empty_last: bool) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::BadPattern("no blocks".into()));
        }
        let last = sizes.len() - 1;
        if sizes
            .iter()
            .enumerate()
            .any(|(i, &s)| s == 0 && !(allow_empty_last && i == last))
        {
            return Err(Error::BadPattern(format!("zero block size in {sizes:?}")));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &s in sizes {
            acc += s;
            offsets.push(acc);
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            offsets,
        })
    }

    pub fn new(sizes: &[usize]) -> Result<Self> {
        Self::build(sizes, false)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of coordinates covered.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block(&self, m: usize) -> Result<Range<usize>> {
        if m >= self.sizes.len() {
            return Err(Error::BadBlock(m));
        }
        Ok(self.offsets[m]..self.offsets[m + 1])
    }

    /// The coordinates of `n` lying in block `m`, in order.
    pub fn project<T: Copy>(&self, n: &[T], m: usize) -> Result<Vec<T>> {
        let range = self.block(m)?;
        if n.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: n.len(),
            });
        }
        Ok(n[range].to_vec())
    }

    /// Block containing coordinate `c`.
    pub fn block_of(&self, c: usize) -> Option<usize> {
        (0..self.sizes.len()).find(|&m| self.offsets[m] <= c && c < self.offsets[m + 1])
    }
}
