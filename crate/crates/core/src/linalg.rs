//! Dense complex kernels: LU determinants, shifted Hessenberg determinants for
//! fast characteristic-polynomial sampling, and the eigenvalue solver.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Determinant by LU factorization with partial pivoting, destroying `a`
/// (row-major, `n × n`).
fn lu_det_in_place(a: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = ONE;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].norm_sqr()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return ZERO;
        }
        if p != k {
            for j in k..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        let inv = pivot.inv();
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let prow = &head[k * n..k * n + n];
        for row in tail.chunks_exact_mut(n) {
            let f = row[k] * inv;
            if f != ZERO {
                for j in k + 1..n {
                    row[j] -= f * prow[j];
                }
            }
        }
    }
    det
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return ONE;
    }
    let mut a = row_major(m);
    lu_det_in_place(&mut a, n)
}

/// `det(M − λI)`.
pub fn shifted_determinant(m: &CMatrix, lambda: Complex64) -> Complex64 {
    let n = m.nrows();
    let mut a = row_major(m);
    for i in 0..n {
        a[i * n + i] -= lambda;
    }
    lu_det_in_place(&mut a, n)
}

/// Product of row max-magnitudes; the natural scale of `|det M|` for
/// zero tests.
pub fn det_scale(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.norm()).fold(0.0, f64::max))
        .product()
}

/// Largest absolute row sum plus one: a Gershgorin radius enclosing the
/// spectrum with margin.
pub fn gershgorin_radius(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0
}

/// Upper Hessenberg form of `M` (unitarily similar), stored row-major for
/// repeated `det(H − λI)` evaluation in `O(n²)` each.
#[derive(Debug, Clone)]
pub struct HessenbergDet {
    n: usize,
    h: Vec<Complex64>,
}

impl HessenbergDet {
    pub fn new(m: &CMatrix) -> Self {
        let n = m.nrows();
        let h = if n <= 2 {
            m.clone()
        } else {
            m.clone().hessenberg().h()
        };
        Self { n, h: row_major(&h) }
    }

    /// `det(H − λI)` by Gaussian elimination with adjacent-row pivoting.
    pub fn det_shifted(&self, lambda: Complex64) -> Complex64 {
        let n = self.n;
        if n == 0 {
            return ONE;
        }
        let mut a = self.h.clone();
        for i in 0..n {
            a[i * n + i] -= lambda;
        }
        let mut det = ONE;
        for k in 0..n - 1 {
            let below = a[(k + 1) * n + k];
            if below.norm_sqr() > a[k * n + k].norm_sqr() {
                for j in k..n {
                    a.swap(k * n + j, (k + 1) * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            if pivot == ZERO {
                return ZERO;
            }
            let f = a[(k + 1) * n + k] / pivot;
            if f != ZERO {
                for j in k + 1..n {
                    let v = a[k * n + j];
                    a[(k + 1) * n + j] -= f * v;
                }
            }
            det *= pivot;
        }
        det * a[n * n - 1]
    }
}

/// All eigenvalues of a dense complex matrix via the Schur decomposition.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        _ => {
            let schur = nalgebra::Schur::new(m.clone());
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    }
}

/// Greedy nearest pairing of two equal-size multisets; returns the largest
/// pair distance.
pub fn multiset_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    a.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in &a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        used[best] = true;
        worst = worst.max(dist);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = SplitMix64::new(seed);
        CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
    }

    /// Laplace expansion along the first row; exponential, for n ≤ 6 only.
    fn cofactor_det(m: &CMatrix) -> Complex64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                m[(0, j)] * cofactor_det(&minor) * sign
            })
            .sum()
    }

    #[test]
    fn determinant_examples() {
        assert!((determinant(&CMatrix::identity(6, 6)) - ONE).norm() < 1e-15);
        let mut m = random_matrix(5, 3);
        let row = m.row(1).into_owned();
        m.set_row(3, &row);
        assert!(determinant(&m).norm() < 1e-12 * det_scale(&m));
        assert_eq!(determinant(&CMatrix::zeros(4, 4)), ZERO);
        for seed in 0..10 {
            let m = random_matrix(5, seed);
            let (a, b) = (determinant(&m), cofactor_det(&m));
            assert!((a - b).norm() < 1e-10 * b.norm(), "{a} vs {b}");
        }
        let m = random_matrix(6, 77);
        let (a, b) = (determinant(&m), cofactor_det(&m));
        assert!((a - b).norm() < 1e-10 * b.norm());
    }

    #[test]
    fn hessenberg_shifted_det_matches_lu() {
        for n in [1, 2, 3, 7, 30] {
            let m = random_matrix(n, n as u64);
            let h = HessenbergDet::new(&m);
            let mut rng = SplitMix64::new(5);
            for _ in 0..5 {
                let lam = Complex64::new(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
                let a = h.det_shifted(lam);
                let b = shifted_determinant(&m, lam);
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-300), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, ONE * 2.0, ONE * 2.0, ZERO]);
        let ev = eigenvalues(&m);
        assert!(multiset_deviation(&ev, &[ONE * -2.0, ONE * 2.0]) < 1e-12);

        let c = Complex64::new(0.3, -1.1);
        let ev = eigenvalues(&(CMatrix::identity(30, 30) * c));
        assert!(ev.iter().all(|x| (x - c).norm() < 1e-12));

        // eigenvalues reproduce the characteristic polynomial roots
        let m = random_matrix(40, 9);
        let ev = eigenvalues(&m);
        let det = determinant(&m);
        let prod: Complex64 = ev.iter().product();
        assert!((prod - det).norm() < 1e-9 * det.norm());
        let trace: Complex64 = (0..40).map(|i| m[(i, i)]).sum();
        assert!((ev.iter().sum::<Complex64>() - trace).norm() < 1e-9);
    }

    #[test]
    fn multiset_matching() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 1e-3), Complex64::new(-2.0, 0.0)];
        let b = [Complex64::new(-2.0, 0.0), Complex64::new(1.0, 1e-3), Complex64::new(1.0, 0.0)];
        assert_eq!(multiset_deviation(&a, &b), 0.0);
    }
}
