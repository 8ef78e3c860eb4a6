//! Dense kernels: LDLᵀ in any precision backend, a symmetric tridiagonal
//! eigensolver that also returns first eigenvector components, and thin
//! wrappers over nalgebra's dense symmetric eigensolver.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `M = L D Lᵀ` with `L` unit lower triangular and `D > 0`.
#[derive(Debug, Clone)]
pub struct Ldl<S> {
    l: DMatrix<S>,
    d: Vec<S>,
    /// `d_j / m_jj` in double precision.
    pivot_ratios: Vec<f64>,
}

/// Position and value of the first non-positive pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub index: usize,
    pub pivot: f64,
}

impl From<Breakdown> for Error {
    fn from(b: Breakdown) -> Self {
        Error::NotPositiveDefinite {
            index: b.index,
            pivot: b.pivot,
        }
    }
}

/// Factors a symmetric matrix, reading only its lower triangle.
///
/// Stops at the first pivot that is not strictly positive; since the
/// leading `k x k` block of the factorization is the factorization of the
/// leading block, a breakdown at `index` means every leading block of size
/// `<= index` is positive definite and the block of size `index + 1` is not.
pub fn ldl<S: Scalar>(m: &DMatrix<S>) -> std::result::Result<Ldl<S>, Breakdown> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "ldl needs a square matrix");
    let mut l = DMatrix::from_element(n, n, S::zero());
    let mut d: Vec<S> = Vec::with_capacity(n);
    let mut pivot_ratios = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = m[(j, j)].clone();
        for k in 0..j {
            let ljk = l[(j, k)].clone();
            dj = dj - ljk.clone() * ljk * d[k].clone();
        }
        if !dj.is_positive() {
            return Err(Breakdown {
                index: j,
                pivot: dj.to_f64(),
            });
        }
        l[(j, j)] = S::one();
        for i in (j + 1)..n {
            let mut v = m[(i, j)].clone();
            for k in 0..j {
                v = v - l[(i, k)].clone() * l[(j, k)].clone() * d[k].clone();
            }
            l[(i, j)] = v / dj.clone();
        }
        let diag = m[(j, j)].to_f64();
        pivot_ratios.push(if diag > 0.0 { dj.to_f64() / diag } else { f64::NAN });
        d.push(dj);
    }
    Ok(Ldl { l, d, pivot_ratios })
}

impl<S: Scalar> Ldl<S> {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn unit_lower(&self) -> &DMatrix<S> {
        &self.l
    }

    pub fn pivots(&self) -> &[S] {
        &self.d
    }

    pub fn pivot_ratios(&self) -> &[f64] {
        &self.pivot_ratios
    }

    /// Solves `M x = rhs`.
    pub fn solve(&self, rhs: &[S]) -> Vec<S> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        let mut y: Vec<S> = rhs.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] = y[i].clone() - self.l[(i, k)].clone() * y[k].clone();
            }
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi = yi.clone() / di.clone();
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] = y[i].clone() - self.l[(k, i)].clone() * y[k].clone();
            }
        }
        y
    }

    pub fn inverse(&self) -> DMatrix<S> {
        let n = self.dim();
        let mut inv = DMatrix::from_element(n, n, S::zero());
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }

    /// Upper Cholesky factor `U = sqrt(D) Lᵀ` (so `M = Uᵀ U`), rounded to double.
    pub fn upper_factor_f64(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut u = DMatrix::zeros(n, n);
        for i in 0..n {
            let s = self.d[i].sqrt_f64();
            for j in i..n {
                u[(i, j)] = s * self.l[(j, i)].to_f64();
            }
        }
        u
    }
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(f64::NAN)
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).last().copied().unwrap_or(f64::NAN)
}

pub fn to_f64_matrix<S: Scalar>(m: &DMatrix<S>) -> DMatrix<f64> {
    m.map(|v| v.to_f64())
}

/// Smallest eigenvalue of a symmetric matrix held in precision `S`.
///
/// In double precision this is a direct eigensolve. In the other backends
/// the inverse is formed in `S` and `1 / lambda_max(M^{-1})` is returned:
/// the largest eigenvalue of a symmetric matrix is relatively accurate in
/// double, so the result keeps full relative accuracy even when
/// `lambda_min` sits far below `eps * ||M||`. Falls back to the direct
/// solve when `M` is not positive definite.
pub fn min_eigenvalue_in<S: Scalar>(m: &DMatrix<S>) -> f64 {
    if S::MODE == crate::PrecisionMode::Double {
        return min_eigenvalue(&to_f64_matrix(m));
    }
    match ldl(m) {
        Ok(f) => 1.0 / max_eigenvalue(&to_f64_matrix(&f.inverse())),
        Err(_) => min_eigenvalue(&to_f64_matrix(m)),
    }
}

const QL_MAX_SWEEPS: usize = 60;

/// Eigenvalues and first eigenvector components of a symmetric tridiagonal
/// matrix (implicit QL with Wilkinson-type shifts).
///
/// `diag` has length `n`, `off` length `n - 1`. Eigenvalues are returned in
/// ascending order together with the first component of the matching
/// normalized eigenvector, which is all Gauss-type quadrature needs.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::EigenSolverFailure { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    Ok((order.iter().map(|&i| d[i]).collect(), order.iter().map(|&i| z[i]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigRational, TwoFloat};

    fn tri_dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
        }
        for (i, &v) in off.iter().enumerate() {
            m[(i, i + 1)] = v;
            m[(i + 1, i)] = v;
        }
        m
    }

    #[test]
    fn ldl_of_small_spd() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        let f = ldl(&m).unwrap();
        assert_eq!(f.pivots(), &[1.0, 1.0]);
        assert_eq!(f.unit_lower()[(1, 0)], 1.0);
        let u = f.upper_factor_f64();
        assert_eq!(u, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        let x = f.solve(&[1.0, 0.0]);
        assert_eq!(x, vec![2.0, -1.0]);
    }

    #[test]
    fn ldl_reports_first_failing_block() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0]);
        let b = ldl(&m).unwrap_err();
        assert_eq!(b.index, 1);
        assert_eq!(b.pivot, -1.0);
    }

    #[test]
    fn ldl_rational_is_exact() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 2.0, 2.0, 5.0, 3.0, 2.0, 3.0, 6.0])
            .map(<BigRational as Scalar>::from_f64);
        let inv = ldl(&m).unwrap().inverse();
        let prod = &m * &inv;
        assert_eq!(prod, DMatrix::identity(3, 3).map(|v: f64| <BigRational as Scalar>::from_f64(v)));
    }

    #[test]
    fn min_eigenvalue_via_inverse_matches_direct() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let direct = min_eigenvalue(&m);
        let ext = min_eigenvalue_in(&m.map(TwoFloat::from));
        let rat = min_eigenvalue_in(&m.map(<BigRational as Scalar>::from_f64));
        assert!((direct - ext).abs() < 1e-14);
        assert!((direct - rat).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_matches_dense_solver() {
        let diag = [0.3, -1.2, 0.8, 2.5, -0.4];
        let off = [1.1, 0.6, 1.9, 0.7];
        let (vals, first) = tridiagonal_eigen(&diag, &off).unwrap();
        let dense = SymmetricEigen::new(tri_dense(&diag, &off));
        let mut pairs: Vec<(f64, f64)> = dense
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, dense.eigenvectors[(0, k)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (k, (v, w)) in pairs.into_iter().enumerate() {
            assert!((vals[k] - v).abs() < 1e-12);
            assert!((first[k].powi(2) - w).abs() < 1e-12);
        }
        let total: f64 = first.iter().map(|z| z * z).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_handles_zero_couplings() {
        let (vals, first) = tridiagonal_eigen(&[2.0, 1.0, 3.0], &[0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        assert_eq!(first.iter().map(|z| z * z).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn tridiagonal_free_block() {
        let (vals, first) = tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
        assert!((first[0].powi(2) - 0.5).abs() < 1e-15);
    }
}
