//! Connecting operators: the Gram matrix of the control-to-state map,
//! built from the response vector, from spectral data, from the control
//! operator and from the Hankel matrix.
//!
//! Two orientations are in use and are never mixed silently:
//! `C^T` ([`Orientation::CornerBottom`]) and `C_T = J_T C^T J_T`
//! ([`Orientation::CornerTop`]). `C_T` is the leading `T x T` section of the
//! semi-infinite matrix `C`, so it grows by bordering as `T` increases.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::control_operator;
use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::linalg::{ldl, symmetric_eigenvalues, to_f64_matrix};
use crate::moments::{build_lambda, HankelMatrix};
use crate::scalar::Scalar;
use crate::spectral::chebyshev_values;
use crate::types::{ResponseVector, SpectralData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `C_T`, anchored at the upper-left corner.
    CornerTop,
    /// `C^T`, anchored at the lower-right corner.
    CornerBottom,
}

impl Orientation {
    pub fn flipped(self) -> Self {
        match self {
            Orientation::CornerTop => Orientation::CornerBottom,
            Orientation::CornerBottom => Orientation::CornerTop,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectingMatrix<S: Scalar = f64> {
    matrix: DMatrix<S>,
    orientation: Orientation,
}

impl<S: Scalar> ConnectingMatrix<S> {
    pub fn new(matrix: DMatrix<S>, orientation: Orientation) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("connecting matrix must be square and non-empty".into()));
        }
        Ok(Self { matrix, orientation })
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<S> {
        self.matrix
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `J C J` with the orientation tag switched.
    pub fn flipped(&self) -> Self {
        let t = self.dim();
        Self {
            matrix: DMatrix::from_fn(t, t, |i, j| self.matrix[(t - 1 - i, t - 1 - j)].clone()),
            orientation: self.orientation.flipped(),
        }
    }

    pub fn oriented(&self, orientation: Orientation) -> Self {
        if self.orientation == orientation {
            self.clone()
        } else {
            self.flipped()
        }
    }

    pub fn to_corner_top(&self) -> Self {
        self.oriented(Orientation::CornerTop)
    }

    pub fn to_corner_bottom(&self) -> Self {
        self.oriented(Orientation::CornerBottom)
    }

    pub fn to_f64(&self) -> ConnectingMatrix<f64> {
        ConnectingMatrix { matrix: to_f64_matrix(&self.matrix), orientation: self.orientation }
    }
}

impl ConnectingMatrix<f64> {
    /// Largest entrywise difference after aligning `other` to this orientation.
    pub fn max_abs_diff(&self, other: &ConnectingMatrix<f64>) -> f64 {
        let other = other.oriented(self.orientation);
        (&self.matrix - &other.matrix).amax()
    }
}

fn check_horizon(t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    Ok(())
}

/// Entry `(i, j)` (1-based) of the semi-infinite matrix `C`:
/// `sum_{k=0}^{min(i,j)-1} r_{|i-j|+2k}`. Needs `r` up to `i + j - 2`.
pub fn semi_infinite_entry<S: Scalar>(r: &[S], i: usize, j: usize) -> S {
    let d = i.abs_diff(j);
    (0..i.min(j)).fold(S::zero(), |acc, k| acc + r[d + 2 * k].clone())
}

/// `{C^T}_{ij} = sum_{k=0}^{T-max(i,j)} r_{|i-j|+2k}` (1-based).
pub fn connecting_from_response(r: &ResponseVector, t: usize) -> Result<ConnectingMatrix> {
    connecting_from_response_in(r.as_slice(), t)
}

pub fn connecting_from_response_in<S: Scalar>(r: &[S], t: usize) -> Result<ConnectingMatrix<S>> {
    check_horizon(t)?;
    if r.len() < 2 * t - 1 {
        return Err(Error::InsufficientData { what: "response entries", needed: 2 * t - 1, got: r.len() });
    }
    let matrix = DMatrix::from_fn(t, t, |i, j| {
        let (i, j) = (i + 1, j + 1);
        let d = i.abs_diff(j);
        (0..=t - i.max(j)).fold(S::zero(), |acc, k| acc + r[d + 2 * k].clone())
    });
    ConnectingMatrix::new(matrix, Orientation::CornerBottom)
}

/// `{C^T}_{l+1,m+1} = int T_{T-l} T_{T-m} d rho` against the spectral data of
/// `A^N`, `T <= N`.
pub fn connecting_from_spectrum(data: &SpectralData, t: usize) -> Result<ConnectingMatrix> {
    check_horizon(t)?;
    if t > data.len() {
        return Err(Error::InvalidArgument(format!(
            "T = {t} exceeds N = {}: the spectral representation needs T <= N",
            data.len()
        )));
    }
    let tables: Vec<(f64, Vec<f64>)> = data.points().iter().map(|p| (p.weight, chebyshev_values(t, p.lambda))).collect();
    let matrix = DMatrix::from_fn(t, t, |l, m| {
        tables.iter().map(|(w, ch)| w * ch[t - l] * ch[t - m]).sum()
    });
    ConnectingMatrix::new(matrix, Orientation::CornerBottom)
}

/// `C_T = W_T^* W_T` with `W_T` from forward simulation.
pub fn gram_from_control(coeffs: &JacobiCoefficients, t: usize) -> Result<ConnectingMatrix> {
    let w = control_operator(coeffs, t)?;
    let w = w.matrix();
    ConnectingMatrix::new(w.transpose() * w, Orientation::CornerTop)
}

/// `C_T = Lambda_T S_T Lambda_T^*`.
pub fn connecting_from_hankel<S: Scalar>(s: &HankelMatrix<S>) -> Result<ConnectingMatrix<S>> {
    let t = s.dim();
    let lambda = build_lambda(t)?.to_matrix::<S>();
    let h = s.matrix();
    let matrix = DMatrix::from_fn(t, t, |i, j| {
        let mut acc = S::zero();
        for k in 0..=i {
            if lambda[(i, k)].is_zero() {
                continue;
            }
            for l in 0..=j {
                if lambda[(j, l)].is_zero() {
                    continue;
                }
                acc = acc + lambda[(i, k)].clone() * h[(k, l)].clone() * lambda[(j, l)].clone();
            }
        }
        acc
    });
    ConnectingMatrix::new(matrix, Orientation::CornerTop)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseValidation {
    pub positive_definite: bool,
    pub min_eigenvalue: f64,
    /// 1-based size of the first leading section of `C_N` that is not
    /// positive definite.
    pub failure_index: Option<usize>,
}

/// `r` of length `2N - 1` is the response of some Jacobi matrix iff `C^N > 0`.
pub fn validate_response(r: &ResponseVector, n: usize) -> Result<ResponseValidation> {
    let c = connecting_from_response(r, n)?.to_corner_top();
    let failure_index = ldl(c.matrix()).err().map(|b| b.index + 1);
    let min_eigenvalue = symmetric_eigenvalues(c.matrix())[0];
    Ok(ResponseValidation { positive_definite: failure_index.is_none(), min_eigenvalue, failure_index })
}
