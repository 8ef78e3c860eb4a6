//! Hankel matrices of moments and the integer transform `Lambda_T` that maps
//! moments to the response vector, `r = Lambda_T s`.
//!
//! Row `i` (0-based) of `Lambda_T` holds the monomial coefficients of
//! `T_{i+1}`, so `r_i = int T_{i+1} d rho`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ldl, max_eigenvalue, min_eigenvalue_in, to_f64_matrix};
use crate::scalar::{PrecisionMode, Scalar};
use crate::types::{MomentSequence, ResponseVector};
use crate::with_precision;

/// `S[i][j] = s_{i+j}`, `0 <= i, j < T`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix<S: Scalar = f64> {
    matrix: DMatrix<S>,
}

impl<S: Scalar> HankelMatrix<S> {
    pub fn matrix(&self) -> &DMatrix<S> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<S> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `s_0 .. s_{2T-2}` read back from the first row and last column.
    pub fn moments(&self) -> Vec<S> {
        let t = self.dim();
        (0..2 * t - 1)
            .map(|k| if k < t { self.matrix[(0, k)].clone() } else { self.matrix[(k + 1 - t, t - 1)].clone() })
            .collect()
    }
}

pub fn build_hankel(s: &MomentSequence, t: usize) -> Result<HankelMatrix> {
    build_hankel_in(s.as_slice(), t)
}

pub fn build_hankel_in<S: Scalar>(s: &[S], t: usize) -> Result<HankelMatrix<S>> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    if s.len() < 2 * t - 1 {
        return Err(Error::InsufficientData { what: "moments", needed: 2 * t - 1, got: s.len() });
    }
    Ok(HankelMatrix { matrix: DMatrix::from_fn(t, t, |i, j| s[i + j].clone()) })
}

fn binomial(n: usize, k: usize) -> BigInt {
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// The unit lower-triangular integer matrix `Lambda_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChebyshevTransform {
    rows: Vec<Vec<BigInt>>,
}

/// `alpha_{ij} = binom((i+j)/2, j) (-1)^{(i+j)/2 + j}` for `j <= i`, `i + j`
/// even; zero otherwise.
pub fn build_lambda(t: usize) -> Result<ChebyshevTransform> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    let rows = (0..t)
        .map(|i| {
            (0..=i)
                .map(|j| {
                    if (i + j) % 2 == 1 {
                        return BigInt::zero();
                    }
                    let m = (i + j) / 2;
                    let v = binomial(m, j);
                    if (m + j) % 2 == 0 {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    Ok(ChebyshevTransform { rows })
}

impl ChebyshevTransform {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> BigInt {
        if j > i {
            BigInt::zero()
        } else {
            self.rows[i][j].clone()
        }
    }

    /// Monomial coefficients of `T_{i+1}`, lowest degree first.
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.rows[i]
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> BigInt {
        self.rows.iter().flatten().map(|v| v.abs()).max().unwrap_or_default()
    }

    pub fn to_matrix<S: Scalar>(&self) -> DMatrix<S> {
        let t = self.dim();
        DMatrix::from_fn(t, t, |i, j| if j > i { S::zero() } else { S::from_bigint(&self.rows[i][j]) })
    }

    fn converted<S: Scalar>(&self) -> Vec<Vec<S>> {
        self.rows.iter().map(|r| r.iter().map(S::from_bigint).collect()).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::InvalidArgument(format!("vector of length {len} does not match T = {}", self.dim())));
        }
        Ok(())
    }

    /// `Lambda x`.
    pub fn apply<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_len(x.len())?;
        let m = self.converted::<S>();
        Ok(m.iter()
            .map(|row| row.iter().zip(x).fold(S::zero(), |acc, (a, v)| acc + a.clone() * v.clone()))
            .collect())
    }

    /// `Lambda^{-1} y` by forward substitution (unit diagonal).
    pub fn solve<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        self.check_len(y.len())?;
        let m = self.converted::<S>();
        let mut x: Vec<S> = Vec::with_capacity(y.len());
        for (i, row) in m.iter().enumerate() {
            let mut v = y[i].clone();
            for j in 0..i {
                v = v - row[j].clone() * x[j].clone();
            }
            x.push(v);
        }
        Ok(x)
    }

    /// `Lambda^T x`.
    pub fn apply_transpose<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_len(x.len())?;
        let m = self.converted::<S>();
        let t = self.dim();
        Ok((0..t)
            .map(|j| (j..t).fold(S::zero(), |acc, i| acc + m[i][j].clone() * x[i].clone()))
            .collect())
    }

    /// `Lambda^{-T} c`: converts monomial coefficients `c` of a polynomial of
    /// degree `< T` into its coefficients in `T_1, ..., T_T`.
    pub fn monomial_to_chebyshev<S: Scalar>(&self, c: &[S]) -> Result<Vec<S>> {
        self.check_len(c.len())?;
        let m = self.converted::<S>();
        let t = self.dim();
        let mut f = vec![S::zero(); t];
        for j in (0..t).rev() {
            let mut v = c[j].clone();
            for i in j + 1..t {
                v = v - m[i][j].clone() * f[i].clone();
            }
            f[j] = v;
        }
        Ok(f)
    }
}

/// `s = Lambda_T^{-1} r` in precision `S`.
pub fn response_to_moments_in<S: Scalar>(r: &[S]) -> Result<Vec<S>> {
    build_lambda(r.len())?.solve(r)
}

/// `r = Lambda_T s` in precision `S`.
pub fn moments_to_response_in<S: Scalar>(s: &[S]) -> Result<Vec<S>> {
    build_lambda(s.len())?.apply(s)
}

pub fn response_to_moments(r: &ResponseVector, precision: PrecisionMode) -> Result<MomentSequence> {
    with_precision!(precision, S => {
        let x: Vec<S> = r.0.iter().map(|&v| S::from_f64(v)).collect();
        Ok(MomentSequence(response_to_moments_in(&x)?.iter().map(|v| v.to_f64()).collect()))
    })
}

pub fn moments_to_response(s: &MomentSequence, precision: PrecisionMode) -> Result<ResponseVector> {
    with_precision!(precision, S => {
        let x: Vec<S> = s.0.iter().map(|&v| S::from_f64(v)).collect();
        Ok(ResponseVector(moments_to_response_in(&x)?.iter().map(|v| v.to_f64()).collect()))
    })
}

/// Moments of the semicircle law `(1 / 2 pi) sqrt(4 - x^2) dx` on `(-2, 2)`,
/// the spectral measure of the free chain: Catalan numbers at even orders.
pub fn semicircle_moments_exact(count: usize) -> Vec<BigInt> {
    (0..count)
        .map(|m| {
            if m % 2 == 1 {
                BigInt::zero()
            } else {
                let k = m / 2;
                binomial(2 * k, k) / BigInt::from(k + 1)
            }
        })
        .collect()
}

pub fn semicircle_moments(count: usize) -> MomentSequence {
    MomentSequence(semicircle_moments_exact(count).iter().map(f64::from_bigint).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HankelPositivity {
    pub precision: PrecisionMode,
    /// `lambda_N = min eig(S_N)` for `N = 1..=N_max`.
    pub min_eigenvalues: Vec<f64>,
    /// Smallest `N` with `S_N` not positive definite.
    pub first_failure: Option<usize>,
    /// `N` where `lambda_N < 1e3 eps ||S_N||` in double precision.
    pub ill_conditioned: Vec<usize>,
}

impl HankelPositivity {
    pub fn solvable(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Relative level below which a double-precision eigenvalue is noise.
pub(crate) fn double_noise_level(norm: f64) -> f64 {
    1e3 * f64::EPSILON * norm
}

/// Minimum eigenvalue of every leading section `S_1..S_{N_max}` together
/// with a solvability verdict from an `LDL^T` sweep.
pub fn hankel_positivity(s: &MomentSequence, n_max: usize, precision: PrecisionMode) -> Result<HankelPositivity> {
    with_precision!(precision, S => {
        let x: Vec<S> = s.0.iter().map(|&v| S::from_f64(v)).collect();
        let full = build_hankel_in(&x, n_max)?.into_matrix();
        let first_failure = ldl(&full).err().map(|b| b.index + 1);
        let sections: Vec<(f64, bool)> = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let sub = full.view((0, 0), (n, n)).into_owned();
                let lambda = min_eigenvalue_in(&sub);
                let noisy = S::MODE == PrecisionMode::Double
                    && lambda < double_noise_level(max_eigenvalue(&to_f64_matrix(&sub)));
                (lambda, noisy)
            })
            .collect();
        Ok(HankelPositivity {
            precision,
            min_eigenvalues: sections.iter().map(|p| p.0).collect(),
            first_failure,
            ill_conditioned: sections.iter().enumerate().filter(|(_, p)| p.1).map(|(i, _)| i + 1).collect(),
        })
    })
}
