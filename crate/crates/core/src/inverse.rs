//! Recovery of `a_1..a_{T-1}`, `b_1..b_{T-1}` from a response vector or a
//! moment sequence.
//!
//! Both routes factor a positive definite matrix as `L D L^T`:
//!
//! - response: `C_T = W_T^* W_T`, and by uniqueness of the Cholesky factor
//!   `sqrt(D) L^T = W_T`. Its diagonal is `prod_{j<=k} a_j`, and the first
//!   superdiagonal satisfies `w_{k,k} = (prod_{j<k} a_j)(b_1 + ... + b_k)`.
//! - moments: `S_T = L D L^T` where the rows of `L^{-1}` are the monic
//!   orthogonal polynomials, `D` holds their squared norms `prod a_j^2` and
//!   the subdiagonal of `L` holds `b_1 + ... + b_k` again.
//!
//! So in both cases `a_k = sqrt(d_k / d_{k-1})` and
//! `b_k = L[k][k-1] - L[k-1][k-2]` (0-based, with `L[0][-1] = 0`).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::connecting::connecting_from_response_in;
use crate::dynamics::response_vector;
use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::linalg::{ldl, Ldl};
use crate::moments::{build_hankel_in, build_lambda, moments_to_response_in};
use crate::scalar::{PrecisionMode, Scalar};
use crate::types::{MomentSequence, ResponseVector};
use crate::with_precision;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryPath {
    /// Factorization of the connecting operator `C_T`.
    BoundaryControl,
    /// Factorization of the Hankel matrix `S_T`.
    Hankel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub coefficients: JacobiCoefficients,
    /// `a_1..a_{T-1}`.
    pub a: Vec<f64>,
    /// `b_1..b_{T-1}`.
    pub b: Vec<f64>,
    /// Max abs difference between the input response (entries `0..2T-1`)
    /// and the response of the recovered coefficients.
    pub residual: f64,
    pub path: RecoveryPath,
    pub precision: PrecisionMode,
}

enum Failure {
    Breakdown(usize),
    Conditioning { index: usize, ratio: f64 },
}

fn factor_checked<S: Scalar>(m: &DMatrix<S>) -> std::result::Result<Ldl<S>, Failure> {
    let f = ldl(m).map_err(|b| Failure::Breakdown(b.index))?;
    let guard = S::pivot_guard();
    if let Some((index, &ratio)) = f.pivot_ratios().iter().enumerate().find(|(_, &r)| r < guard) {
        return Err(Failure::Conditioning { index, ratio });
    }
    Ok(f)
}

fn extract<S: Scalar>(f: &Ldl<S>) -> (Vec<f64>, Vec<f64>) {
    let d = f.pivots();
    let l = f.unit_lower();
    let t = f.dim();
    let mut a = Vec::with_capacity(t - 1);
    let mut b = Vec::with_capacity(t - 1);
    let mut prev_sum = S::zero();
    for k in 1..t {
        a.push((d[k].clone() / d[k - 1].clone()).sqrt_f64());
        let sum = l[(k, k - 1)].clone();
        b.push((sum.clone() - prev_sum).to_f64());
        prev_sum = sum;
    }
    (a, b)
}

fn check_horizon(t: usize, len: usize, what: &'static str) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument("T must be at least 1".into()));
    }
    if len < 2 * t - 1 {
        return Err(Error::InsufficientData { what, needed: 2 * t - 1, got: len });
    }
    Ok(())
}

fn finish(a: Vec<f64>, b: Vec<f64>, target: &[f64], path: RecoveryPath, precision: PrecisionMode) -> Result<RecoveryResult> {
    let coefficients = JacobiCoefficients::from_tail(&a, &b)?;
    let replay = response_vector(&coefficients, target.len())?;
    let residual = replay.0.iter().zip(target).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(RecoveryResult { coefficients, a, b, residual, path, precision })
}

fn threshold_error(index: usize, ratio: f64, precision: PrecisionMode) -> Error {
    let threshold = with_precision!(precision, S => S::pivot_guard());
    Error::IllConditioned { index, ratio, threshold }
}

/// Recovers the coefficients from `r_0..r_{2T-2}` via `C_T = U^T U`.
pub fn recover_from_response(r: &ResponseVector, t: usize, precision: PrecisionMode) -> Result<RecoveryResult> {
    check_horizon(t, r.len(), "response entries")?;
    with_precision!(precision, S => {
        let x: Vec<S> = r.0[..2 * t - 1].iter().map(|&v| S::from_f64(v)).collect();
        recover_from_response_in(&x, t)
    })
}

/// [`recover_from_response`] on data already held in precision `S`, so that
/// a response computed in extended or exact arithmetic keeps its digits.
pub fn recover_from_response_in<S: Scalar>(r: &[S], t: usize) -> Result<RecoveryResult> {
    check_horizon(t, r.len(), "response entries")?;
    let c = connecting_from_response_in(&r[..2 * t - 1], t)?.to_corner_top();
    let (a, b) = match factor_checked(c.matrix()) {
        Ok(f) => extract(&f),
        Err(Failure::Breakdown(index)) => return Err(Error::NotAResponseVector { index }),
        Err(Failure::Conditioning { index, ratio }) => return Err(threshold_error(index, ratio, S::MODE)),
    };
    let target: Vec<f64> = r[..2 * t - 1].iter().map(S::to_f64).collect();
    finish(a, b, &target, RecoveryPath::BoundaryControl, S::MODE)
}

/// Recovers the coefficients from `s_0..s_{2T-2}` by factoring `S_T` directly.
pub fn recover_from_moments(s: &MomentSequence, t: usize, precision: PrecisionMode) -> Result<RecoveryResult> {
    check_horizon(t, s.len(), "moments")?;
    with_precision!(precision, S => {
        let x: Vec<S> = s.0[..2 * t - 1].iter().map(|&v| S::from_f64(v)).collect();
        recover_from_moments_in(&x, t)
    })
}

/// [`recover_from_moments`] on data held in precision `S`.
pub fn recover_from_moments_in<S: Scalar>(s: &[S], t: usize) -> Result<RecoveryResult> {
    check_horizon(t, s.len(), "moments")?;
    let x = &s[..2 * t - 1];
    let h = build_hankel_in(x, t)?;
    let (a, b) = match factor_checked(h.matrix()) {
        Ok(f) => extract(&f),
        Err(Failure::Breakdown(index)) => return Err(Error::NotAMomentSequence { index }),
        Err(Failure::Conditioning { index, ratio }) => return Err(threshold_error(index, ratio, S::MODE)),
    };
    let target: Vec<f64> = moments_to_response_in(x)?.iter().map(S::to_f64).collect();
    finish(a, b, &target, RecoveryPath::Hankel, S::MODE)
}

/// Converts moments to a response vector (`r = Lambda s`) and runs
/// [`recover_from_response`].
pub fn recover_from_moments_via_response(s: &MomentSequence, t: usize, precision: PrecisionMode) -> Result<RecoveryResult> {
    check_horizon(t, s.len(), "moments")?;
    let r = with_precision!(precision, S => {
        let x: Vec<S> = s.0[..2 * t - 1].iter().map(|&v| S::from_f64(v)).collect();
        build_lambda(2 * t - 1)?.apply(&x)?.iter().map(|v| v.to_f64()).collect::<Vec<f64>>()
    });
    match recover_from_response(&ResponseVector(r), t, precision) {
        Err(Error::NotAResponseVector { index }) => Err(Error::NotAMomentSequence { index }),
        other => other,
    }
}

/// Upper Cholesky factor `U` of `C_T` (`C_T = U^T U`), which equals `W_T`.
pub fn control_factor_from_response(r: &ResponseVector, t: usize) -> Result<DMatrix<f64>> {
    check_horizon(t, r.len(), "response entries")?;
    let c = connecting_from_response_in(&r.0[..2 * t - 1], t)?.to_corner_top();
    let f = ldl(c.matrix()).map_err(|b| Error::NotAResponseVector { index: b.index })?;
    Ok(f.upper_factor_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::control_operator;

    const D: PrecisionMode = PrecisionMode::Double;

    #[test]
    fn free_response_gives_free_chain() {
        let r = ResponseVector(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let rec = recover_from_response(&r, 4, D).unwrap();
        assert_eq!(rec.a, vec![1.0; 3]);
        assert_eq!(rec.b, vec![0.0; 3]);
        assert_eq!(rec.residual, 0.0);
    }

    #[test]
    fn small_examples() {
        let rec = recover_from_response(&ResponseVector(vec![1.0, 1.0, 1.0]), 2, D).unwrap();
        assert_eq!((rec.a.clone(), rec.b.clone()), (vec![1.0], vec![1.0]));
        let rec = recover_from_moments(&MomentSequence(vec![1.0, 0.0, 1.0]), 2, D).unwrap();
        assert_eq!((rec.a.clone(), rec.b.clone(), rec.path), (vec![1.0], vec![0.0], RecoveryPath::Hankel));
        let rec = recover_from_moments(&MomentSequence(vec![1.0, 1.0, 2.0]), 2, D).unwrap();
        assert_eq!((rec.a, rec.b), (vec![1.0], vec![1.0]));
        let rec = recover_from_response(&ResponseVector(vec![1.0]), 1, D).unwrap();
        assert!(rec.a.is_empty() && rec.b.is_empty());
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            recover_from_response(&ResponseVector(vec![1.0, 2.0, 0.0]), 2, D),
            Err(Error::NotAResponseVector { index: 1 })
        ));
        assert!(matches!(
            recover_from_moments(&MomentSequence(vec![1.0, 1.0, 1.0]), 2, D),
            Err(Error::NotAMomentSequence { .. })
        ));
        assert!(matches!(
            recover_from_response(&ResponseVector(vec![1.0, 0.0]), 2, D),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn recovers_generated_coefficients_in_every_precision() {
        let a = [0.8, 1.4, 0.6, 1.1, 1.9];
        let b = [0.3, -0.7, 0.2, 0.9, -0.1];
        let coeffs = JacobiCoefficients::from_tail(&a, &b).unwrap();
        let r = response_vector(&coeffs, 11).unwrap();
        for mode in [PrecisionMode::Double, PrecisionMode::Extended, PrecisionMode::Rational] {
            let rec = recover_from_response(&r, 6, mode).unwrap();
            for k in 0..5 {
                assert!((rec.a[k] - a[k]).abs() < 1e-12, "{mode}: a_{}", k + 1);
                assert!((rec.b[k] - b[k]).abs() < 1e-12, "{mode}: b_{}", k + 1);
            }
            assert!(rec.residual < 1e-12);
        }
    }

    #[test]
    fn cholesky_factor_is_the_control_operator() {
        let coeffs = JacobiCoefficients::from_tail(&[0.8, 1.4, 0.6, 1.1, 1.9], &[0.3, -0.7, 0.2, 0.9, -0.1]).unwrap();
        let r = response_vector(&coeffs, 11).unwrap();
        let u = control_factor_from_response(&r, 6).unwrap();
        let w = control_operator(&coeffs, 6).unwrap();
        assert!((u - w.matrix()).amax() < 1e-12);
    }

    #[test]
    fn both_moment_paths_agree() {
        let coeffs = JacobiCoefficients::from_tail(&[0.8, 1.4, 0.6, 1.1], &[0.3, -0.7, 0.2, 0.9]).unwrap();
        let r = response_vector(&coeffs, 9).unwrap();
        let s = crate::moments::response_to_moments(&r, D).unwrap();
        let h = recover_from_moments(&s, 5, D).unwrap();
        let c = recover_from_moments_via_response(&s, 5, D).unwrap();
        for k in 0..4 {
            assert!((h.a[k] - c.a[k]).abs() < 1e-12 && (h.b[k] - c.b[k]).abs() < 1e-12);
        }
    }
}
