//! Eigenvalue sequences and integral bounds that separate the limit point
//! (determinate) case from the limit circle (indeterminate) case.
//!
//! - `lambda_N = min eig(S_N)` tends to zero iff the moment problem is
//!   determinate; in the limit circle case it stays above the bound
//!   `(int_0^{2 pi} l^{-1}(e^{i th}) d th / 2 pi)^{-1}`, `l^{-1}(z) = sum |p_k(z)|^2`.
//! - `beta_T = min eig(C_T)` is non-increasing in `T` and, in the limit
//!   circle case, stays above `(int_{-1}^1 l^{-1}(x) dx / sqrt(1 - x^2))^{-1}`.
//!   The converse fails (the free chain has `beta_T = 1`), so the verdict
//!   never rests on `beta_T`.
//! - `gamma_T = max eig(C_T)` bounded forces the limit point case.
//!
//! Eigenvalues can be computed from data (response, moments) in any
//! precision, or from coefficients by a well-conditioned route:
//! `S_N^{-1} = P^T P` and `C_T^{-1} = M^T M`, where the rows of `P` and `M`
//! are the coefficients of `p_1..p_N` in the monomial and Chebyshev bases.
//! Then `lambda_N = 1 / sigma_max(P)^2`, `beta_T = 1 / sigma_max(M)^2`, and
//! `gamma_T = sigma_max(W_T)^2`. Entries of `P`, `M` are generated by the
//! recurrence, so no cancellation-prone Gram matrix is ever formed.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connecting::connecting_from_response_in;
use crate::dynamics::control_operator;
use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::linalg::{max_eigenvalue, min_eigenvalue_in, to_f64_matrix};
use crate::moments::{build_hankel_in, double_noise_level};
use crate::scalar::{PrecisionMode, Scalar};
use crate::spectral::{p_values, q_values};
use crate::types::{MomentSequence, ResponseVector};
use crate::with_precision;

/// `lambda_N` below this counts as having reached zero.
pub const EPS_DET: f64 = 1e-8;
/// Relative tail tolerance for the series tests.
pub const TAIL_TOL: f64 = 1e-10;
/// Slack allowed in the monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Horizons below this give no verdict.
pub const MIN_HORIZON: usize = 4;
const TAIL_WINDOW: usize = 5;
const THETA_POINTS: usize = 2048;
const CHEBYSHEV_NODES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSequence {
    /// Entry `k` belongs to `N = k + 1` (or `T = k + 1`).
    pub values: Vec<f64>,
    /// Indices (1-based) where a double-precision value sits in the noise.
    pub ill_conditioned: Vec<usize>,
    /// Indices (1-based) where the expected monotonicity fails by more than
    /// [`MONOTONE_SLACK`].
    pub monotonicity_violations: Vec<usize>,
}

#[derive(Clone, Copy)]
enum Direction {
    NonIncreasing,
    NonDecreasing,
}

fn violations(values: &[f64], dir: Direction) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| match dir {
            Direction::NonIncreasing => w[1] > w[0] + MONOTONE_SLACK * w[0].abs().max(1.0),
            Direction::NonDecreasing => w[1] < w[0] - MONOTONE_SLACK * w[0].abs().max(1.0),
        })
        .map(|(i, _)| i + 2)
        .collect()
}

fn section_sequence<S: Scalar>(full: &DMatrix<S>, max: bool, dir: Direction) -> EigenSequence {
    let n = full.nrows();
    let rows: Vec<(f64, bool)> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let sub = full.view((0, 0), (k, k)).into_owned();
            let top = max_eigenvalue(&to_f64_matrix(&sub));
            if max {
                (top, false)
            } else {
                let v = min_eigenvalue_in(&sub);
                (v, S::MODE == PrecisionMode::Double && v < double_noise_level(top))
            }
        })
        .collect();
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    EigenSequence {
        monotonicity_violations: violations(&values, dir),
        ill_conditioned: rows.iter().enumerate().filter(|(_, r)| r.1).map(|(i, _)| i + 1).collect(),
        values,
    }
}

/// `lambda_N = min eig(S_N)`, `N = 1..=n_max`.
pub fn hankel_min_eig_sequence(s: &MomentSequence, n_max: usize, precision: PrecisionMode) -> Result<EigenSequence> {
    with_precision!(precision, S => {
        let x: Vec<S> = s.0.iter().map(|&v| S::from_f64(v)).collect();
        let h = build_hankel_in(&x, n_max)?;
        Ok(section_sequence(h.matrix(), false, Direction::NonIncreasing))
    })
}

fn connecting_sections<S: Scalar>(r: &ResponseVector, t_max: usize) -> Result<DMatrix<S>> {
    let x: Vec<S> = r.0.iter().map(|&v| S::from_f64(v)).collect();
    Ok(connecting_from_response_in(&x, t_max)?.to_corner_top().into_matrix())
}

/// `beta_T = min eig(C_T)`, `T = 1..=t_max`; checked to be non-increasing.
pub fn connecting_min_eig_sequence(r: &ResponseVector, t_max: usize, precision: PrecisionMode) -> Result<EigenSequence> {
    with_precision!(precision, S => {
        let c = connecting_sections::<S>(r, t_max)?;
        Ok(section_sequence(&c, false, Direction::NonIncreasing))
    })
}

/// `gamma_T = max eig(C_T)`, `T = 1..=t_max`; checked to be non-decreasing.
pub fn connecting_max_eig_sequence(r: &ResponseVector, t_max: usize, precision: PrecisionMode) -> Result<EigenSequence> {
    with_precision!(precision, S => {
        let c = connecting_sections::<S>(r, t_max)?;
        Ok(section_sequence(&c, true, Direction::NonDecreasing))
    })
}

#[derive(Clone, Copy)]
enum Basis {
    Monomial,
    Chebyshev,
}

/// Row `n` holds the coefficients of `p_{n+1}` in the chosen basis
/// (`x^0, x^1, ...` or `T_1, T_2, ...`).
fn polynomial_coefficients(coeffs: &JacobiCoefficients, n: usize, basis: Basis) -> Result<DMatrix<f64>> {
    let a = coeffs.a_prefix(n.saturating_sub(1))?;
    let b = coeffs.b_prefix(n.saturating_sub(1))?;
    let times_lambda = |c: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (k, &v) in c.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if k + 1 < n {
                out[k + 1] += v;
            }
            // lambda T_{k+1} = T_{k+2} + T_k
            if let (Basis::Chebyshev, true) = (basis, k >= 1) {
                out[k - 1] += v;
            }
        }
        out
    };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    rows.push(first);
    for k in 1..n {
        // a_k p_{k+1} = (lambda - b_k) p_k - a_{k-1} p_{k-1}
        let cur = &rows[k - 1];
        let mut next = times_lambda(cur);
        for j in 0..n {
            next[j] -= b[k - 1] * cur[j];
            if k >= 2 {
                next[j] -= a[k - 1] * rows[k - 2][j];
            }
            next[j] /= a[k];
        }
        rows.push(next);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn inverse_sigma_sequence(p: &DMatrix<f64>) -> Vec<f64> {
    (1..=p.nrows())
        .into_par_iter()
        .map(|k| {
            let sub = p.view((0, 0), (k, k)).into_owned();
            let s = sub.singular_values().max();
            1.0 / (s * s)
        })
        .collect()
}

/// `lambda_N`, `N = 1..=n_max`, from the coefficients.
pub fn hankel_min_eig_from_coefficients(coeffs: &JacobiCoefficients, n_max: usize) -> Result<Vec<f64>> {
    Ok(inverse_sigma_sequence(&polynomial_coefficients(coeffs, n_max, Basis::Monomial)?))
}

/// `beta_T`, `T = 1..=t_max`, from the coefficients.
pub fn connecting_min_eig_from_coefficients(coeffs: &JacobiCoefficients, t_max: usize) -> Result<Vec<f64>> {
    Ok(inverse_sigma_sequence(&polynomial_coefficients(coeffs, t_max, Basis::Chebyshev)?))
}

/// `gamma_T = sigma_max(W_T)^2`, `T = 1..=t_max`.
pub fn connecting_max_eig_from_coefficients(coeffs: &JacobiCoefficients, t_max: usize) -> Result<Vec<f64>> {
    let w = control_operator(coeffs, t_max)?;
    Ok((1..=t_max)
        .into_par_iter()
        .map(|k| {
            let s = w.matrix().view((0, 0), (k, k)).into_owned().singular_values().max();
            s * s
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencySums {
    pub z: Complex64,
    /// Number of terms summed.
    pub terms: usize,
    pub p_sum: f64,
    pub q_sum: f64,
    /// Largest of the last few terms relative to the partial sum.
    pub p_tail: f64,
    pub q_tail: f64,
    /// First `n` after which both relative tails stay below [`TAIL_TOL`].
    pub converged_at: Option<usize>,
}

impl DeficiencySums {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }
}

fn tail_ratios(terms: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(terms.len());
    for (n, &t) in terms.iter().enumerate() {
        sum += t;
        let start = (n + 1).saturating_sub(TAIL_WINDOW);
        let recent = terms[start..=n].iter().copied().fold(0.0, f64::max);
        out.push(if sum > 0.0 { recent / sum } else { f64::INFINITY });
    }
    out
}

/// Partial sums of `|p_n(z)|^2` and `|q_n(z)|^2` for `n = 1..=n_max`.
pub fn deficiency_sums(coeffs: &JacobiCoefficients, z: Complex64, n_max: usize) -> Result<DeficiencySums> {
    let p: Vec<f64> = p_values(coeffs, n_max, z)?.iter().map(|v| v.norm_sqr()).collect();
    let q: Vec<f64> = q_values(coeffs, n_max, z)?.iter().map(|v| v.norm_sqr()).collect();
    let pt = tail_ratios(&p);
    let qt = tail_ratios(&q);
    let ok: Vec<bool> = (0..n_max).map(|n| n + 1 >= TAIL_WINDOW && pt[n] < TAIL_TOL && qt[n] < TAIL_TOL).collect();
    let converged_at = if ok.last() == Some(&true) {
        let first_bad = ok.iter().rposition(|&v| !v);
        Some(first_bad.map_or(1, |i| i + 2))
    } else {
        None
    };
    Ok(DeficiencySums {
        z,
        terms: n_max,
        p_sum: p.iter().sum(),
        q_sum: q.iter().sum(),
        p_tail: *pt.last().unwrap_or(&f64::INFINITY),
        q_tail: *qt.last().unwrap_or(&f64::INFINITY),
        converged_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleBound {
    pub value: f64,
    pub truncation: usize,
    /// Worst relative size of the last terms of `sum |p_k|^2` over the nodes.
    pub tail: f64,
}

/// `l^{-1} = sum_{k=1}^K |p_k|^2` at every node, with divergence detection.
fn inverse_l<V>(coeffs: &JacobiCoefficients, k: usize, nodes: &[V]) -> Result<(Vec<f64>, f64)>
where
    V: crate::spectral::Field + Send + Sync,
    V: Into<Complex64>,
{
    let rows: Vec<(f64, f64, bool)> = nodes
        .par_iter()
        .map(|&z| {
            let terms: Vec<f64> = p_values(coeffs, k, z)?.into_iter().map(|v| Into::<Complex64>::into(v).norm_sqr()).collect();
            let total: f64 = terms.iter().sum();
            let mut diverging = !total.is_finite();
            let mut tail = 0.0;
            if k >= 2 * TAIL_WINDOW && !diverging {
                let last: f64 = terms[k - TAIL_WINDOW..].iter().sum();
                let prev: f64 = terms[k - 2 * TAIL_WINDOW..k - TAIL_WINDOW].iter().sum();
                tail = last / total;
                diverging = last >= prev && tail > 1e-14;
            }
            Ok((total, tail, diverging))
        })
        .collect::<Result<_>>()?;
    if let Some(i) = rows.iter().position(|r| r.2) {
        return Err(Error::NotLimitCircle(format!(
            "sum |p_k|^2 is not decreasing in its tail at node {i} after {k} terms"
        )));
    }
    let tail = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((rows.into_iter().map(|r| r.0).collect(), tail))
}

/// `(int_0^{2 pi} l^{-1}(e^{i th}) d th / 2 pi)^{-1}` with the series
/// truncated at `k` terms and a 2048-point trapezoid rule.
pub fn circle_bound_hankel(coeffs: &JacobiCoefficients, k: usize) -> Result<CircleBound> {
    check_truncation(k)?;
    let nodes: Vec<Complex64> = (0..THETA_POINTS)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / THETA_POINTS as f64))
        .collect();
    let (inv, tail) = inverse_l(coeffs, k, &nodes)?;
    let mean = inv.iter().sum::<f64>() / THETA_POINTS as f64;
    Ok(CircleBound { value: 1.0 / mean, truncation: k, tail })
}

/// `(int_{-1}^1 l^{-1}(x) dx / sqrt(1 - x^2))^{-1}` with the series truncated
/// at `k` terms and 256-node Gauss-Chebyshev quadrature.
pub fn circle_bound_connecting(coeffs: &JacobiCoefficients, k: usize) -> Result<CircleBound> {
    check_truncation(k)?;
    let n = CHEBYSHEV_NODES;
    let nodes: Vec<f64> = (1..=n).map(|j| ((2 * j - 1) as f64 * PI / (2 * n) as f64).cos()).collect();
    let (inv, tail) = inverse_l(coeffs, k, &nodes)?;
    let integral = PI / n as f64 * inv.iter().sum::<f64>();
    Ok(CircleBound { value: 1.0 / integral, truncation: k, tail })
}

fn check_truncation(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("truncation order must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    LikelyDeterminate,
    LikelyIndeterminate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminacyReport {
    pub n_max: usize,
    pub lambda_seq: Vec<f64>,
    pub beta_seq: Vec<f64>,
    pub gamma_seq: Vec<f64>,
    pub beta_violations: Vec<usize>,
    pub gamma_violations: Vec<usize>,
    /// `None` when the series diverges (or the horizon is too short).
    pub hankel_bound: Option<CircleBound>,
    pub connecting_bound: Option<CircleBound>,
    pub deficiency: DeficiencySums,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

/// Relative change under which a sequence counts as settled.
const PLATEAU_TOL: f64 = 1e-6;

/// Builds every sequence and bound for `N = 1..=n_max` and a heuristic
/// verdict. Deficiency sums use `5 n_max` terms at `z = i`.
pub fn classify(coeffs: &JacobiCoefficients, n_max: usize) -> Result<DeterminacyReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N_max must be at least 1".into()));
    }
    let lambda_seq = hankel_min_eig_from_coefficients(coeffs, n_max)?;
    let beta_seq = connecting_min_eig_from_coefficients(coeffs, n_max)?;
    let gamma_seq = connecting_max_eig_from_coefficients(coeffs, n_max)?;
    let horizon = (5 * n_max).max(2 * TAIL_WINDOW);
    let deficiency = deficiency_sums(coeffs, Complex64::i(), horizon)?;
    let (hankel_bound, connecting_bound) = if deficiency.converged() {
        (circle_bound_hankel(coeffs, horizon).ok(), circle_bound_connecting(coeffs, horizon).ok())
    } else {
        (None, None)
    };

    let mut reasons = Vec::new();
    let last = n_max - 1;
    let half = n_max.div_ceil(2) - 1;
    let lambda_last = lambda_seq[last];
    let verdict = if n_max < MIN_HORIZON {
        reasons.push(format!("horizon {n_max} below the minimum {MIN_HORIZON}"));
        Verdict::Inconclusive
    } else {
        let lambda_settled = lambda_last >= EPS_DET
            && (lambda_seq[last - 1] - lambda_last).abs() <= PLATEAU_TOL * lambda_last;
        let gamma_plateau = gamma_seq[last] <= (1.0 + PLATEAU_TOL) * gamma_seq[half];
        if deficiency.converged() && lambda_settled {
            reasons.push(format!(
                "deficiency sums at z = i converge (n = {}) and lambda_N settles at {lambda_last:.6e}",
                deficiency.converged_at.unwrap_or(horizon)
            ));
            Verdict::LikelyIndeterminate
        } else if lambda_last < EPS_DET {
            reasons.push(format!("lambda_{n_max} = {lambda_last:.3e} below {EPS_DET:e}"));
            Verdict::LikelyDeterminate
        } else if gamma_plateau {
            reasons.push(format!(
                "gamma_T bounded: gamma_{n_max} = {:.6e} within {PLATEAU_TOL:e} of gamma_{}",
                gamma_seq[last],
                half + 1
            ));
            Verdict::LikelyDeterminate
        } else {
            reasons.push("no criterion decisive at this horizon".into());
            Verdict::Inconclusive
        }
    };
    Ok(DeterminacyReport {
        n_max,
        beta_violations: violations(&beta_seq, Direction::NonIncreasing),
        gamma_violations: violations(&gamma_seq, Direction::NonDecreasing),
        lambda_seq,
        beta_seq,
        gamma_seq,
        hankel_bound,
        connecting_bound,
        deficiency,
        verdict,
        reasons,
    })
}
