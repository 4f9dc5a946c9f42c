//! Floquet matrices `D_V(k)` of `Δ + V` under the boundary condition
//! `u(n + q_j e_j) = e^{2πik_j} u(n)`, and the diagonalized pair `A_z + B_V`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{unit_root, PeriodLattice};
use crate::linalg::{self, CMatrix, HessenbergDet};
use crate::potential::Potential;

/// Largest accepted `|Im k_j|`; beyond it `e^{±2πik_j}` leaves the range
/// where the determinants stay finite at desk scale.
pub const MAX_IMAG_K: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    lattice: PeriodLattice,
    /// `e^{2πik_j}` for each coordinate.
    phases: Vec<Complex64>,
    matrix: CMatrix,
}

impl FloquetMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn lattice(&self) -> &PeriodLattice {
        &self.lattice
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// Largest `|M(n;n') − conj(M(n';n))|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// `e^{2πik}` for a possibly complex `k`.
pub fn bloch_phase(k: Complex64) -> Complex64 {
    (Complex64::new(0.0, TAU) * k).exp()
}

/// `D_V(k)` from the quasi-momenta `k ∈ ℂ^d`.
pub fn build_dv(v: &Potential, k: &[Complex64]) -> Result<FloquetMatrix> {
    check_len(v.lattice(), k.len())?;
    if let Some(j) = k.iter().position(|x| x.im.abs() > MAX_IMAG_K) {
        return Err(Error::ImaginaryPartTooLarge(j, MAX_IMAG_K));
    }
    build_dv_from_phases(v, &k.iter().map(|&x| bloch_phase(x)).collect::<Vec<_>>())
}

/// `D_V(k)` at real quasi-momenta.
pub fn build_dv_real(v: &Potential, k: &[f64]) -> Result<FloquetMatrix> {
    let k: Vec<Complex64> = k.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    build_dv(v, &k)
}

/// `𝒟_V(w)`: the Floquet matrix parameterized directly by `w_j = e^{2πik_j}`.
///
/// Every nearest-neighbour hop contributes separately, so for `q_j ≤ 2` the
/// wrapping and interior hops to the same site add up.
pub fn build_dv_from_phases(v: &Potential, w: &[Complex64]) -> Result<FloquetMatrix> {
    let lat = v.lattice();
    check_len(lat, w.len())?;
    if let Some(j) = w.iter().position(|x| *x == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroSpectralParameter(j));
    }
    let size = lat.volume();
    let mut m = CMatrix::zeros(size, size);
    for (row, n) in lat.points().enumerate() {
        m[(row, row)] += v.values()[row];
        for j in 0..lat.dim() {
            let q = lat.period(j);
            let mut nb = n.clone();
            // forward hop
            let fwd_phase = if n[j] + 1 == q { w[j] } else { Complex64::new(1.0, 0.0) };
            nb[j] = (n[j] + 1) % q;
            let col = lat.index_unchecked(&nb);
            m[(row, col)] += fwd_phase;
            // backward hop
            let back_phase = if n[j] == 0 { w[j].inv() } else { Complex64::new(1.0, 0.0) };
            nb[j] = (n[j] + q - 1) % q;
            let col = lat.index_unchecked(&nb);
            m[(row, col)] += back_phase;
        }
    }
    Ok(FloquetMatrix {
        lattice: lat.clone(),
        phases: w.to_vec(),
        matrix: m,
    })
}

/// `D̃_V(z) = 𝒟_V(z₁^{q₁}, …, z_d^{q_d})`.
pub fn build_dv_tilde(v: &Potential, z: &[Complex64]) -> Result<FloquetMatrix> {
    let lat = v.lattice();
    check_len(lat, z.len())?;
    let w: Vec<Complex64> = z
        .iter()
        .enumerate()
        .map(|(j, zj)| zj.powu(lat.period(j) as u32))
        .collect();
    build_dv_from_phases(v, &w)
}

fn check_len(lat: &PeriodLattice, got: usize) -> Result<()> {
    if got != lat.dim() {
        return Err(Error::LengthMismatch {
            expected: lat.dim(),
            got,
        });
    }
    Ok(())
}

/// The pair `(A_z, B_V)` with `A_z` diagonal,
/// `A_z(n;n) = Σ_j (ρ^j_{n_j} z_j + 1/(ρ^j_{n_j} z_j))`, and
/// `B_V(n;n') = V̂(n − n')`.
#[derive(Debug, Clone)]
pub struct FloquetPair {
    pub lattice: PeriodLattice,
    pub a_diag: Vec<Complex64>,
    pub b: CMatrix,
}

impl FloquetPair {
    pub fn sum(&self) -> CMatrix {
        let mut m = self.b.clone();
        for (i, a) in self.a_diag.iter().enumerate() {
            m[(i, i)] += a;
        }
        m
    }
}

pub fn build_floquet_pair(v: &Potential, z: &[Complex64]) -> Result<FloquetPair> {
    let lat = v.lattice();
    check_len(lat, z.len())?;
    if let Some(j) = z.iter().position(|x| *x == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroSpectralParameter(j));
    }
    let a_diag = lat
        .points()
        .map(|n| {
            (0..lat.dim())
                .map(|j| {
                    let x = unit_root(lat.period(j), n[j] as i64) * z[j];
                    x + x.inv()
                })
                .sum()
        })
        .collect();
    let table = v.dft();
    let size = lat.volume();
    let points: Vec<Vec<usize>> = lat.points().collect();
    let b = CMatrix::from_fn(size, size, |r, c| {
        let diff: Vec<i64> = points[r]
            .iter()
            .zip(&points[c])
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        table.at(&diff)
    });
    Ok(FloquetPair {
        lattice: lat.clone(),
        a_diag,
        b,
    })
}

pub use linalg::{determinant, eigenvalues};

/// Coefficients `c_0, …, c_Q` of `det(M − λI) = Σ_m c_m λ^m`.
///
/// Samples the determinant at `λ_t = R·e^{2πit/(Q+1)}` and inverts the node
/// Vandermonde with an inverse DFT followed by the `R^{-m}` rescaling. When
/// `radius` is `None` a Gershgorin bound is used.
pub fn charpoly_lambda(m: &CMatrix, radius: Option<f64>) -> Vec<Complex64> {
    let r = radius.unwrap_or_else(|| linalg::gershgorin_radius(m));
    let values = charpoly_samples(m, r);
    samples_to_coefficients(&values, r)
}

/// `det(M − λ_t I)` at the `Q+1` interpolation nodes on the circle of radius `r`.
pub fn charpoly_samples(m: &CMatrix, r: f64) -> Vec<Complex64> {
    let nodes = m.nrows() + 1;
    let h = HessenbergDet::new(m);
    (0..nodes)
        .map(|t| h.det_shifted(unit_root(nodes, t as i64) * r))
        .collect()
}

fn samples_to_coefficients(values: &[Complex64], r: f64) -> Vec<Complex64> {
    let nodes = values.len();
    (0..nodes)
        .map(|m| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(t, v)| v * unit_root(nodes, -((t * m) as i64 % nodes as i64)))
                .sum();
            s / (nodes as f64 * r.powi(m as i32))
        })
        .collect()
}

/// Horner evaluation of a coefficient list in ascending order.
pub fn eval_poly(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// The interpolation radius `2d + max|V| + 1`, which dominates the spectral
/// radius of `D_V(k)` for real `k`.
pub fn natural_radius(v: &Potential) -> f64 {
    2.0 * v.lattice().dim() as f64 + v.max_abs() + 1.0
}

/// `P_V(k, λ) = det(D_V(k) − λI)` at real `k`.
pub fn p_v(v: &Potential, k: &[f64], lambda: Complex64) -> Result<Complex64> {
    Ok(linalg::shifted_determinant(build_dv_real(v, k)?.matrix(), lambda))
}

/// `𝒫_V(w, λ)` in terms of the Bloch phases `w_j = e^{2πik_j}`.
pub fn p_v_phases(v: &Potential, w: &[Complex64], lambda: Complex64) -> Result<Complex64> {
    Ok(linalg::shifted_determinant(
        build_dv_from_phases(v, w)?.matrix(),
        lambda,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceCheck {
    pub pass: bool,
    /// Largest matched eigenvalue distance divided by `max(1, spectral radius)`.
    pub deviation: f64,
}

/// Compares the spectra of `D̃_V(z)` and `A_z + B_V`.
pub fn verify_unitary_equivalence(
    v: &Potential,
    z: &[Complex64],
    tol: f64,
) -> Result<EquivalenceCheck> {
    let pair = build_floquet_pair(v, z)?;
    let dv = build_dv_tilde(v, z)?;
    Ok(compare_spectra(dv.matrix(), &pair.sum(), tol))
}

pub(crate) fn compare_spectra(a: &CMatrix, b: &CMatrix, tol: f64) -> EquivalenceCheck {
    let ea = eigenvalues(a);
    let eb = eigenvalues(b);
    let scale = ea.iter().chain(&eb).map(|x| x.norm()).fold(1.0, f64::max);
    let deviation = linalg::multiset_deviation(&ea, &eb) / scale;
    EquivalenceCheck {
        pass: deviation < tol,
        deviation,
    }
}
