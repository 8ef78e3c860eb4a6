use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A boundary control `(f_0, ..., f_{T-1})` in `F^T = C^T` with inner product
/// `(f, g) = sum conj(f_i) g_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryControl {
    values: Vec<Complex64>,
}

impl BoundaryControl {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("control horizon must be at least 1".into()));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// `delta = (1, 0, ..., 0)` with horizon `horizon`.
    pub fn impulse(horizon: usize) -> Result<Self> {
        Self::unit(horizon, 0)
    }

    /// Canonical basis control: `f_slot = 1`, all other entries zero.
    pub fn unit(horizon: usize, slot: usize) -> Result<Self> {
        if slot >= horizon {
            return Err(Error::InvalidArgument(format!("slot {slot} outside horizon {horizon}")));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); horizon];
        v[slot] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn zero(horizon: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); horizon])
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `f_t`, zero outside the horizon.
    pub fn at(&self, t: usize) -> Complex64 {
        self.values.get(t).copied().unwrap_or_default()
    }

    /// `J_T f`: the control read backwards.
    pub fn reversed(&self) -> Self {
        let mut v = self.values.clone();
        v.reverse();
        Self { values: v }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(f, g)| f.conj() * g)
            .sum()
    }
}

/// Convolution kernel `(r_0, ..., r_{L-1})` of the response operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponseVector(pub Vec<f64>);

impl ResponseVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for ResponseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Power moments `(s_0, ..., s_{L-1})` of a measure on the line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentSequence(pub Vec<f64>);

impl MomentSequence {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for MomentSequence {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    /// `w_k = 1 / rho_k`.
    pub weight: f64,
}

/// Eigenvalues of `A^N` with the weights of the discrete spectral measure
/// `d rho_N`, sorted by eigenvalue. Serializes as `[{lambda, weight}, ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralData {
    points: Vec<SpectralPoint>,
}

impl SpectralData {
    /// Checks positivity of weights and distinctness of nodes.
    pub fn new(mut points: Vec<SpectralPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("spectral data must be non-empty".into()));
        }
        points.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
        if let Some(p) = points.iter().find(|p| p.weight.is_nan() || p.weight <= 0.0 || !p.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spectral weight must be positive and node finite, got ({}, {})",
                p.lambda, p.weight
            )));
        }
        if points.windows(2).any(|w| w[0].lambda == w[1].lambda) {
            return Err(Error::InvalidArgument("spectral nodes must be distinct".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[SpectralPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.lambda)
    }

    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// `sum_k w_k f(lambda_k)`, summed in node order.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().map(|p| p.weight * f(p.lambda)).sum()
    }

    pub fn integrate_complex(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.points.iter().map(|p| f(p.lambda) * p.weight).sum()
    }
}
