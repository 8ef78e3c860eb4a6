//! Forward solvers for the boundary-driven discrete wave system
//!
//! ```text
//! u_{n,t+1} = a_n u_{n+1,t} + a_{n-1} u_{n-1,t} + b_n u_{n,t} - u_{n,t-1},   n >= 1, t >= 0
//! u_{n,-1} = u_{n,0} = 0,   u_{0,t} = f_t
//! ```
//!
//! on the half-line (semi-infinite matrix `A`) and on `1 <= n <= N` with the
//! Dirichlet condition `u_{N+1,t} = 0` (matrix `A^N`), together with the
//! response vector and the control operator `W^T = W_T J_T`.
//!
//! Waves travel one site per step, so the semi-infinite field vanishes for
//! `n > t`. The solvers use this: they only touch cells inside the light
//! cone and only request the coefficients those cells depend on.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::scalar::Scalar;
use crate::types::{BoundaryControl, ResponseVector};

/// Solution `u[n][t]` for `0 <= n <= rows`, `-1 <= t <= horizon`. Row 0 holds
/// the control.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    rows: usize,
    horizon: usize,
    data: Vec<Complex64>,
}

impl WaveField {
    fn zeros(rows: usize, horizon: usize) -> Self {
        Self {
            rows,
            horizon,
            data: vec![Complex64::default(); (rows + 1) * (horizon + 2)],
        }
    }

    fn idx(&self, n: usize, t: isize) -> usize {
        n * (self.horizon + 2) + (t + 1) as usize
    }

    /// Field built cell by cell; `f(n, t)` for `0 <= t <= horizon`.
    pub(crate) fn from_fn(rows: usize, horizon: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut u = Self::zeros(rows, horizon);
        for n in 0..=rows {
            for t in 0..=horizon {
                u.set(n, t as isize, f(n, t));
            }
        }
        u
    }

    fn set(&mut self, n: usize, t: isize, v: Complex64) {
        let i = self.idx(n, t);
        self.data[i] = v;
    }

    /// Number of spatial sites (excluding the boundary row 0).
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `u_{n,t}`; zero outside the stored range.
    pub fn get(&self, n: usize, t: isize) -> Complex64 {
        if n > self.rows || t < -1 || t > self.horizon as isize {
            return Complex64::default();
        }
        self.data[self.idx(n, t)]
    }

    /// `(u_{1,t}, ..., u_{rows,t})`.
    pub fn state(&self, t: usize) -> Vec<Complex64> {
        (1..=self.rows).map(|n| self.get(n, t as isize)).collect()
    }

    /// Largest `|u - v|` over sites `1..=min(rows)` and times `0..=min(horizon)`.
    pub fn max_abs_diff(&self, other: &WaveField) -> f64 {
        let rows = self.rows.min(other.rows);
        let horizon = self.horizon.min(other.horizon) as isize;
        let mut worst = 0.0_f64;
        for n in 1..=rows {
            for t in 0..=horizon {
                worst = worst.max((self.get(n, t) - other.get(n, t)).norm());
            }
        }
        worst
    }
}

/// Coefficients `a_0..=a_{a_max}` and `b_1..=b_{b_count}` fetched up front.
struct Band {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Band {
    fn fetch(coeffs: &JacobiCoefficients, a_max: usize, b_count: usize) -> Result<Self> {
        Ok(Self {
            a: coeffs.a_prefix(a_max)?,
            b: coeffs.b_prefix(b_count)?,
        })
    }

    fn a(&self, n: usize) -> f64 {
        self.a[n]
    }

    fn b(&self, n: usize) -> f64 {
        self.b[n - 1]
    }
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Runs the recurrence on sites `1..=rows`; `u_{rows+1} = 0`.
fn propagate(band: &Band, rows: usize, control: &BoundaryControl, horizon: usize) -> WaveField {
    let mut u = WaveField::zeros(rows, horizon);
    for t in 0..horizon {
        u.set(0, t as isize, control.at(t));
    }
    for t in 0..horizon {
        let ti = t as isize;
        for n in 1..=(t + 1).min(rows) {
            let mut v = u.get(n - 1, ti) * band.a(n - 1) - u.get(n, ti - 1);
            if n <= t {
                v += u.get(n, ti) * band.b(n);
            }
            if n < t.min(rows) {
                v += u.get(n + 1, ti) * band.a(n);
            }
            u.set(n, ti + 1, v);
        }
    }
    u
}

/// Semi-infinite system on the horizon `0..=horizon`.
///
/// Control entries past `control.horizon()` are zero. Needs `a_0..a_{T-1}`
/// and `b_1..b_{T-1}`.
pub fn solve_semi_infinite(
    coeffs: &JacobiCoefficients,
    control: &BoundaryControl,
    horizon: usize,
) -> Result<WaveField> {
    check_horizon(horizon)?;
    let band = Band::fetch(coeffs, horizon - 1, horizon - 1)?;
    Ok(propagate(&band, horizon, control, horizon))
}

/// Finite system for `A^N` (sites `1..=n`, Dirichlet at `n + 1`).
pub fn solve_finite(
    coeffs: &JacobiCoefficients,
    n: usize,
    control: &BoundaryControl,
    horizon: usize,
) -> Result<WaveField> {
    check_horizon(horizon)?;
    if n == 0 {
        return Err(Error::InvalidArgument("number of sites must be at least 1".into()));
    }
    let band = Band::fetch(coeffs, horizon.min(n) - 1, (horizon - 1).min(n))?;
    Ok(propagate(&band, n, control, horizon))
}

/// Response vector `(r_0, ..., r_{L-1})` with `r_{t-1} = u^delta_{1,t}`.
pub fn response_vector(coeffs: &JacobiCoefficients, len: usize) -> Result<ResponseVector> {
    response_vector_in::<f64>(coeffs, len).map(ResponseVector)
}

/// [`response_vector`] computed in precision `S`.
///
/// Only cells that can still reach site 1 by time `L` are simulated, so the
/// coefficients used are exactly `a_1..a_{floor((L-1)/2)}` and
/// `b_1..b_{floor(L/2)}`. In particular `2N - 1` entries come from `A^N`.
pub fn response_vector_in<S: Scalar>(coeffs: &JacobiCoefficients, len: usize) -> Result<Vec<S>> {
    if len == 0 {
        return Err(Error::InvalidArgument("response length must be at least 1".into()));
    }
    let a: Vec<S> = coeffs.a_prefix((len - 1) / 2)?.into_iter().map(S::from_f64).collect();
    let b: Vec<S> = coeffs.b_prefix(len / 2)?.into_iter().map(S::from_f64).collect();
    let width = len / 2 + 3;
    // u at times t-1, t (index n = site)
    let mut prev = vec![S::zero(); width];
    let mut cur = vec![S::zero(); width];
    let mut out = Vec::with_capacity(len);
    for t in 0..len {
        let mut next = vec![S::zero(); width];
        let top = (t + 1).min(len - t);
        for n in 1..=top {
            let left = if n == 1 {
                if t == 0 {
                    S::one()
                } else {
                    S::zero()
                }
            } else {
                cur[n - 1].clone()
            };
            let mut v = a[n - 1].clone() * left - prev[n].clone();
            if n <= t {
                v = v + b[n - 1].clone() * cur[n].clone();
            }
            if n < t {
                v = v + a[n].clone() * cur[n + 1].clone();
            }
            next[n] = v;
        }
        out.push(next[1].clone());
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(out)
}

/// `(R^T f)_t = sum_{s=0}^{t-1} r_s f_{t-1-s}` for `t = 1..=T`.
pub fn apply_response(r: &ResponseVector, control: &BoundaryControl) -> Vec<Complex64> {
    let horizon = control.horizon().min(r.len());
    (1..=horizon)
        .map(|t| (0..t).map(|s| control.at(t - 1 - s) * r.0[s]).sum())
        .collect()
}

/// The upper-triangular factor `W_T` of the control operator `W^T = W_T J_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOperatorMatrix {
    w: DMatrix<f64>,
}

impl ControlOperatorMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn horizon(&self) -> usize {
        self.w.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.w.diagonal().iter().copied().collect()
    }

    /// `W^T f = W_T J_T f = (u^f_{1,T}, ..., u^f_{T,T})`.
    pub fn apply(&self, control: &BoundaryControl) -> Vec<Complex64> {
        self.apply_unreversed(&control.reversed())
    }

    /// `W_T f`.
    pub fn apply_unreversed(&self, f: &BoundaryControl) -> Vec<Complex64> {
        let t = self.horizon();
        (0..t)
            .map(|i| (0..t).map(|j| f.at(j) * self.w[(i, j)]).sum())
            .collect()
    }
}

/// Builds `W_T` column by column from the states reached at time `T` under
/// the canonical basis controls.
///
/// Column `k` is the state produced by `f = J_T e_k`, i.e. a unit impulse
/// at time `T - 1 - k`.
pub fn control_operator(coeffs: &JacobiCoefficients, horizon: usize) -> Result<ControlOperatorMatrix> {
    check_horizon(horizon)?;
    let band = Band::fetch(coeffs, horizon - 1, horizon - 1)?;
    let columns: Vec<Vec<f64>> = (0..horizon)
        .into_par_iter()
        .map(|k| {
            let control = BoundaryControl::unit(horizon, horizon - 1 - k).expect("slot inside horizon");
            let field = propagate(&band, horizon, &control, horizon);
            field.state(horizon).into_iter().map(|v| v.re).collect()
        })
        .collect();
    let w = DMatrix::from_fn(horizon, horizon, |i, j| columns[j][i]);
    Ok(ControlOperatorMatrix { w })
}

/// `W_T` in precision `S`, by the same column-by-column simulation as
/// [`control_operator`] (controls are real, so the field is real).
pub fn control_operator_in<S: Scalar>(coeffs: &JacobiCoefficients, horizon: usize) -> Result<DMatrix<S>> {
    check_horizon(horizon)?;
    let a: Vec<S> = coeffs.a_prefix(horizon - 1)?.into_iter().map(S::from_f64).collect();
    let b: Vec<S> = coeffs.b_prefix(horizon - 1)?.into_iter().map(S::from_f64).collect();
    let columns: Vec<Vec<S>> = (0..horizon)
        .into_par_iter()
        .map(|k| {
            let fire = horizon - 1 - k;
            // sites 0..=horizon+1; site 0 carries the control
            let mut prev = vec![S::zero(); horizon + 2];
            let mut cur = vec![S::zero(); horizon + 2];
            for t in 0..horizon {
                cur[0] = if t == fire { S::one() } else { S::zero() };
                let mut next = vec![S::zero(); horizon + 2];
                for n in 1..=(t + 1).min(horizon) {
                    let mut v = a[n - 1].clone() * cur[n - 1].clone() - prev[n].clone();
                    if n <= t {
                        v = v + b[n - 1].clone() * cur[n].clone();
                    }
                    if n < t.min(horizon) {
                        v = v + a[n].clone() * cur[n + 1].clone();
                    }
                    next[n] = v;
                }
                prev = std::mem::replace(&mut cur, next);
            }
            cur[1..=horizon].to_vec()
        })
        .collect();
    Ok(DMatrix::from_fn(horizon, horizon, |i, j| columns[j][i].clone()))
}

/// First superdiagonal of `W_T` predicted from the coefficients:
/// `w_{k,k} = (prod_{j<k} a_j) (b_1 + ... + b_k)` for `k = 1..T-1`.
///
/// Entry `k - 1` of the result is the matrix entry at 0-based `(k - 1, k)`.
pub fn predicted_superdiagonal(coeffs: &JacobiCoefficients, horizon: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(horizon.saturating_sub(1));
    let mut prod = 1.0;
    let mut bsum = 0.0;
    for k in 1..horizon {
        if k > 1 {
            prod *= coeffs.a(k - 1)?;
        }
        bsum += coeffs.b(k)?;
        out.push(prod * bsum);
    }
    Ok(out)
}
