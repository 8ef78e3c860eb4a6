//! Orthogonal polynomials of the first and second kind, the Chebyshev
//! polynomials `T_t`, spectral data of `A^N` and discrete quadrature.
//!
//! Every polynomial is evaluated by its three-term recurrence; monomial
//! coefficient lists are never formed.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::WaveField;
use crate::error::{Error, Result};
use crate::jacobi::JacobiCoefficients;
use crate::linalg::tridiagonal_eigen;
use crate::types::{BoundaryControl, SpectralData, SpectralPoint};

/// Values the recurrences can run on: `f64` and `Complex64`.
pub trait Field:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> + Div<f64, Output = Self> + From<f64>
{
}

impl Field for f64 {}
impl Field for Complex64 {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolynomialKind {
    /// `p_1 = 1`, `p_2 = (lambda - b_1) / a_1`.
    P,
    /// `q_1 = 0`, `q_2 = 1 / a_1`.
    Q,
    /// `T_0 = 0`, `T_1 = 1`, `T_{t+1} = lambda T_t - T_{t-1}`.
    Chebyshev,
}

/// One of the three recurrence families bound to a coefficient set.
#[derive(Debug, Clone)]
pub struct PolynomialEvaluator<'a> {
    coeffs: &'a JacobiCoefficients,
    kind: PolynomialKind,
}

impl<'a> PolynomialEvaluator<'a> {
    pub fn new(coeffs: &'a JacobiCoefficients, kind: PolynomialKind) -> Self {
        Self { coeffs, kind }
    }

    pub fn kind(&self) -> PolynomialKind {
        self.kind
    }

    /// Value of the `n`-th member. `n >= 1` for `P`/`Q`, `n >= 0` for Chebyshev.
    pub fn eval<V: Field>(&self, n: usize, z: V) -> Result<V> {
        match self.kind {
            PolynomialKind::P => eval_p(self.coeffs, n, z),
            PolynomialKind::Q => eval_q(self.coeffs, n, z),
            PolynomialKind::Chebyshev => Ok(eval_chebyshev(n, z)),
        }
    }

    /// First `count` members, starting at index 1 (`P`, `Q`) or 0 (Chebyshev).
    pub fn values<V: Field>(&self, count: usize, z: V) -> Result<Vec<V>> {
        match self.kind {
            PolynomialKind::P => p_values(self.coeffs, count, z),
            PolynomialKind::Q => q_values(self.coeffs, count, z),
            PolynomialKind::Chebyshev => Ok(chebyshev_values(count.saturating_sub(1), z)),
        }
    }
}

fn recurrence<V: Field>(coeffs: &JacobiCoefficients, count: usize, z: V, first: V, second_times_a1: V) -> Result<Vec<V>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(first);
    if count == 1 {
        return Ok(out);
    }
    let a = coeffs.a_prefix(count - 1)?;
    let b = coeffs.b_prefix(count - 1)?;
    out.push(second_times_a1 / a[1]);
    for n in 2..count {
        // a_n phi_{n+1} = (z - b_n) phi_n - a_{n-1} phi_{n-1}
        let next = ((z - V::from(b[n - 1])) * out[n - 1] - out[n - 2] * a[n - 1]) / a[n];
        out.push(next);
    }
    Ok(out)
}

/// `(p_1(z), ..., p_count(z))`. Needs `a_1..a_{count-1}`, `b_1..b_{count-1}`.
pub fn p_values<V: Field>(coeffs: &JacobiCoefficients, count: usize, z: V) -> Result<Vec<V>> {
    let b1 = if count > 1 { coeffs.b(1)? } else { 0.0 };
    recurrence(coeffs, count, z, V::from(1.0), z - V::from(b1))
}

/// `(q_1(z), ..., q_count(z))`.
pub fn q_values<V: Field>(coeffs: &JacobiCoefficients, count: usize, z: V) -> Result<Vec<V>> {
    recurrence(coeffs, count, z, V::from(0.0), V::from(1.0))
}

fn check_index(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("polynomial index starts at 1".into()));
    }
    Ok(())
}

pub fn eval_p<V: Field>(coeffs: &JacobiCoefficients, n: usize, z: V) -> Result<V> {
    check_index(n)?;
    Ok(p_values(coeffs, n, z)?[n - 1])
}

pub fn eval_q<V: Field>(coeffs: &JacobiCoefficients, n: usize, z: V) -> Result<V> {
    check_index(n)?;
    Ok(q_values(coeffs, n, z)?[n - 1])
}

/// `(T_0(z), ..., T_t(z))`.
pub fn chebyshev_values<V: Field>(t: usize, z: V) -> Vec<V> {
    let mut out = Vec::with_capacity(t + 1);
    out.push(V::from(0.0));
    if t >= 1 {
        out.push(V::from(1.0));
    }
    for k in 2..=t {
        let next = z * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

pub fn eval_chebyshev<V: Field>(t: usize, z: V) -> V {
    chebyshev_values(t, z)[t]
}

/// Eigenvalues of `A^N` with weights equal to the squared first components
/// of the normalized eigenvectors.
pub fn spectral_data(coeffs: &JacobiCoefficients, n: usize) -> Result<SpectralData> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let (diag, off) = coeffs.tridiagonal(n)?;
    let (eigs, first) = tridiagonal_eigen(&diag, &off)?;
    let points = eigs
        .iter()
        .zip(&first)
        .map(|(&lambda, &z)| SpectralPoint { lambda, weight: z * z })
        .collect();
    SpectralData::new(points)
}

/// `1 / rho_k` with `rho_k = sum_{i=1}^N p_i(lambda_k)^2`, evaluated at the
/// given nodes. At the eigenvalues of `A^N` these are the spectral weights.
pub fn christoffel_weights(coeffs: &JacobiCoefficients, n: usize, nodes: &[f64]) -> Result<Vec<f64>> {
    nodes
        .iter()
        .map(|&x| Ok(1.0 / p_values(coeffs, n, x)?.iter().map(|p| p * p).sum::<f64>()))
        .collect()
}

/// `sum_k w_k f(lambda_k)`.
pub fn quadrature(data: &SpectralData, f: impl Fn(f64) -> f64) -> f64 {
    data.integrate(f)
}

/// Solution of the finite system from its spectral representation
/// `v_{n,t} = int sum_{k=1}^t T_k(lambda) f_{t-k} p_n(lambda) d rho^N`.
pub fn solution_via_spectrum(
    coeffs: &JacobiCoefficients,
    n: usize,
    control: &BoundaryControl,
    horizon: usize,
) -> Result<WaveField> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let data = spectral_data(coeffs, n)?;
    // per node: p_1..p_N and T_0..T_horizon
    let tables: Vec<(f64, Vec<f64>, Vec<f64>)> = data
        .points()
        .iter()
        .map(|pt| {
            Ok((
                pt.weight,
                p_values(coeffs, n, pt.lambda)?,
                chebyshev_values(horizon, pt.lambda),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(WaveField::from_fn(n, horizon, |site, t| {
        if site == 0 {
            return if t < horizon { control.at(t) } else { Complex64::default() };
        }
        tables
            .iter()
            .map(|(w, p, cheb)| {
                let fourier: Complex64 = (1..=t).map(|k| control.at(t - k) * cheb[k]).sum();
                fourier * (w * p[site - 1])
            })
            .sum()
    }))
}

/// `(F u^f_{., T})(z) = sum_{k=1}^T T_k(z) f_{T-k}`.
pub fn fourier_image(control: &BoundaryControl, horizon: usize, z: Complex64) -> Complex64 {
    let cheb = chebyshev_values(horizon, z);
    (1..=horizon).map(|k| cheb[k] * control.at(horizon - k)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionStatus {
    /// `h_n` settled and `sum p_n(0)^2 + q_n(0)^2` converges.
    Converged,
    /// `sum p_n(0)^2 + q_n(0)^2` keeps growing: the limit, if any, carries
    /// no information (limit point behaviour at 0).
    NotLimitCircle,
    /// The square sums settle but `h_n` does not.
    NoLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionParameter {
    /// Last available `h_n = -q_n(0) / p_n(0)`.
    pub value: Option<f64>,
    /// `|h_n - h_m|` between the last two available indices.
    pub last_increment: Option<f64>,
    /// `(n, h_n)` for every index with `p_n(0) != 0`.
    pub sequence: Vec<(usize, f64)>,
    /// Indices where `p_n(0)` vanished.
    pub skipped: Vec<usize>,
    pub status: ExtensionStatus,
}

const EXTENSION_TOL: f64 = 1e-10;

/// `h = -lim q_n(0) / p_n(0)` estimated from `n = 1..=n_max`.
pub fn extension_parameter(coeffs: &JacobiCoefficients, n_max: usize) -> Result<ExtensionParameter> {
    check_index(n_max)?;
    let p = p_values(coeffs, n_max, 0.0)?;
    let q = q_values(coeffs, n_max, 0.0)?;
    let mut sequence = Vec::new();
    let mut skipped = Vec::new();
    let mut mass = 0.0;
    let mut last_term = 0.0;
    for n in 0..n_max {
        last_term = p[n] * p[n] + q[n] * q[n];
        mass += last_term;
        if p[n].abs() <= 1e-13 * mass.sqrt() {
            skipped.push(n + 1);
        } else {
            sequence.push((n + 1, -q[n] / p[n]));
        }
    }
    let value = sequence.last().map(|&(_, h)| h);
    let last_increment = match sequence.as_slice() {
        [.., (_, x), (_, y)] => Some((y - x).abs()),
        _ => None,
    };
    let settled = last_increment.is_some_and(|d| d <= EXTENSION_TOL * value.unwrap_or(0.0).abs().max(1.0));
    let status = if last_term > EXTENSION_TOL * mass {
        ExtensionStatus::NotLimitCircle
    } else if settled {
        ExtensionStatus::Converged
    } else {
        ExtensionStatus::NoLimit
    };
    Ok(ExtensionParameter { value, last_increment, sequence, skipped, status })
}
