//! Jacobi coefficients and their materialization.
//!
//! Index conventions: the off-diagonal sequence is indexed from 0 with the
//! sentinel `a_0 = 1`; the diagonal sequence is indexed from 1. Accessors
//! [`JacobiCoefficients::a`] and [`JacobiCoefficients::b`] take those
//! mathematical indices. Matrices are 0-based: entry `(i, i)` of `A^N` is
//! `b_{i+1}` and entry `(i, i+1)` is `a_{i+1}`.

use std::fmt;
use std::sync::RwLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Sequence};
use crate::scalar::Scalar;

/// Rule producing coefficients past the explicitly stored prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Generator {
    /// `a_n = 1`, `b_n = 0`.
    Free,
    /// `a_n = ratio^n`, `b_n = diagonal`.
    Geometric {
        ratio: f64,
        #[serde(default)]
        diagonal: f64,
    },
}

impl Generator {
    fn a(&self, n: usize) -> f64 {
        match *self {
            Generator::Free => 1.0,
            Generator::Geometric { ratio, .. } => ratio.powi(n as i32),
        }
    }

    fn b(&self, _n: usize) -> f64 {
        match *self {
            Generator::Free => 0.0,
            Generator::Geometric { diagonal, .. } => diagonal,
        }
    }
}

#[derive(Default)]
struct Memo {
    a: Vec<f64>,
    b: Vec<f64>,
}

/// The sequences `{a_n}` (off-diagonal, `a_0 = 1`) and `{b_n}` (diagonal,
/// from `n = 1`) of a Jacobi matrix.
///
/// Either finite, or backed by a [`Generator`] that supplies entries past
/// the explicit prefix. Generated entries are memoized.
pub struct JacobiCoefficients {
    /// `a_0, a_1, ...`
    a: Vec<f64>,
    /// `b_1, b_2, ...` stored at `b[0], b[1], ...`
    b: Vec<f64>,
    generator: Option<Generator>,
    memo: RwLock<Memo>,
}

impl Clone for JacobiCoefficients {
    fn clone(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            generator: self.generator,
            memo: RwLock::new(Memo::default()),
        }
    }
}

impl fmt::Debug for JacobiCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JacobiCoefficients")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for JacobiCoefficients {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.generator == other.generator
    }
}

impl JacobiCoefficients {
    /// Finite coefficients. `a` includes the sentinel `a_0 = 1`; `b` starts
    /// at `b_1`.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::build(a, b, None)
    }

    /// Finite coefficients from `a_1, a_2, ...` (the sentinel is prepended).
    pub fn from_tail(a_tail: &[f64], b: &[f64]) -> Result<Self> {
        let mut a = Vec::with_capacity(a_tail.len() + 1);
        a.push(1.0);
        a.extend_from_slice(a_tail);
        Self::new(a, b.to_vec())
    }

    /// Explicit prefix followed by generated entries.
    pub fn with_generator(a: Vec<f64>, b: Vec<f64>, generator: Generator) -> Result<Self> {
        Self::build(a, b, Some(generator))
    }

    /// `a_n = 1`, `b_n = 0` for all `n`.
    pub fn free() -> Self {
        Self::build(vec![1.0], Vec::new(), Some(Generator::Free)).expect("free coefficients are valid")
    }

    /// `a_n = ratio^n`, `b_n = diagonal`.
    pub fn geometric(ratio: f64, diagonal: f64) -> Result<Self> {
        Self::build(vec![1.0], Vec::new(), Some(Generator::Geometric { ratio, diagonal }))
    }

    fn build(a: Vec<f64>, b: Vec<f64>, generator: Option<Generator>) -> Result<Self> {
        let spec = CoefficientSpec {
            a: a.clone(),
            b: b.clone(),
            generator,
        };
        let report = spec.validate();
        if !report.is_valid() {
            return Err(Error::InvalidCoefficients(report.to_string()));
        }
        Ok(Self {
            a,
            b,
            generator,
            memo: RwLock::new(Memo::default()),
        })
    }

    pub fn generator(&self) -> Option<Generator> {
        self.generator
    }

    pub fn is_finite(&self) -> bool {
        self.generator.is_none()
    }

    /// Number of diagonal entries available, `None` when generator-backed.
    pub fn diagonal_len(&self) -> Option<usize> {
        self.generator.is_none().then_some(self.b.len())
    }

    /// Largest `n` with `a_n` available, `None` when generator-backed.
    pub fn off_diagonal_max_index(&self) -> Option<usize> {
        self.generator.is_none().then(|| self.a.len().saturating_sub(1))
    }

    /// `a_n`, `n >= 0`.
    pub fn a(&self, n: usize) -> Result<f64> {
        if let Some(&v) = self.a.get(n) {
            return Ok(v);
        }
        match self.generator {
            None => Err(Error::CoefficientUnderrun {
                sequence: Sequence::OffDiagonal,
                index: n,
                available: self.a.len(),
            }),
            Some(g) => Ok(self.memoized(n - self.a.len(), Sequence::OffDiagonal, |k| {
                g.a(k + self.a.len())
            })),
        }
    }

    /// `b_n`, `n >= 1`.
    pub fn b(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("diagonal entries are indexed from 1".into()));
        }
        if let Some(&v) = self.b.get(n - 1) {
            return Ok(v);
        }
        match self.generator {
            None => Err(Error::CoefficientUnderrun {
                sequence: Sequence::Diagonal,
                index: n,
                available: self.b.len(),
            }),
            Some(g) => {
                let offset = self.b.len() + 1;
                Ok(self.memoized(n - offset, Sequence::Diagonal, |k| g.b(k + offset)))
            }
        }
    }

    fn memoized(&self, k: usize, seq: Sequence, gen: impl Fn(usize) -> f64) -> f64 {
        {
            let memo = self.memo.read().expect("memo lock poisoned");
            let cache = match seq {
                Sequence::OffDiagonal => &memo.a,
                Sequence::Diagonal => &memo.b,
            };
            if let Some(&v) = cache.get(k) {
                return v;
            }
        }
        let mut memo = self.memo.write().expect("memo lock poisoned");
        let cache = match seq {
            Sequence::OffDiagonal => &mut memo.a,
            Sequence::Diagonal => &mut memo.b,
        };
        while cache.len() <= k {
            let next = cache.len();
            cache.push(gen(next));
        }
        cache[k]
    }

    /// `a_0, ..., a_{max}`.
    pub fn a_prefix(&self, max: usize) -> Result<Vec<f64>> {
        (0..=max).map(|n| self.a(n)).collect()
    }

    /// `b_1, ..., b_{count}` (element `i` is `b_{i+1}`).
    pub fn b_prefix(&self, count: usize) -> Result<Vec<f64>> {
        (1..=count).map(|n| self.b(n)).collect()
    }

    /// Returns a finite copy holding `a_0..=a_{a_max}` and `b_1..=b_{b_count}`.
    pub fn truncated(&self, a_max: usize, b_count: usize) -> Result<Self> {
        Self::new(self.a_prefix(a_max)?, self.b_prefix(b_count)?)
    }

    /// Diagonal `b_1..b_N` and off-diagonal `a_1..a_{N-1}` of `A^N`.
    pub fn tridiagonal(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix size must be positive".into()));
        }
        let diag = self.b_prefix(n)?;
        let off = (1..n).map(|k| self.a(k)).collect::<Result<Vec<_>>>()?;
        Ok((diag, off))
    }

    /// Serializable description of these coefficients.
    pub fn to_spec(&self) -> CoefficientSpec {
        CoefficientSpec {
            a: self.a.clone(),
            b: self.b.clone(),
            generator: self.generator,
        }
    }
}

/// The `N x N` block `A^N`.
pub fn materialize_matrix(coeffs: &JacobiCoefficients, n: usize) -> Result<DMatrix<f64>> {
    materialize_matrix_as::<f64>(coeffs, n)
}

/// [`materialize_matrix`] in an arbitrary precision backend.
pub fn materialize_matrix_as<S: Scalar>(coeffs: &JacobiCoefficients, n: usize) -> Result<DMatrix<S>> {
    let (diag, off) = coeffs.tridiagonal(n)?;
    let mut m = DMatrix::from_element(n, n, S::zero());
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = S::from_f64(d);
    }
    for (i, &e) in off.iter().enumerate() {
        let v = S::from_f64(e);
        m[(i, i + 1)] = v.clone();
        m[(i + 1, i)] = v;
    }
    Ok(m)
}

/// On-disk coefficient description:
/// `{"a": [1.0, ...], "b": [...], "generator": null | {"kind": ..., "params": {...}}}`.
///
/// With a generator, the explicit arrays are a prefix and the generator
/// fills every later index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub generator: Option<Generator>,
}

impl CoefficientSpec {
    pub fn validate(&self) -> ValidationReport {
        validate_coefficients(self)
    }

    pub fn build(&self) -> Result<JacobiCoefficients> {
        JacobiCoefficients::build(self.a.clone(), self.b.clone(), self.generator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum ValidationIssue {
    MissingA0,
    A0Convention { found: f64 },
    NonPositiveOffDiagonal { index: usize, value: f64 },
    NonFinite { sequence: String, index: usize },
    InvalidGenerator { reason: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::MissingA0 => write!(f, "a_0 is missing (expected 1)"),
            ValidationIssue::A0Convention { found } => {
                write!(f, "a_0 convention violated: found {found}, expected 1")
            }
            ValidationIssue::NonPositiveOffDiagonal { index, value } => {
                write!(f, "negative or zero off-diagonal a_{index} = {value}")
            }
            ValidationIssue::NonFinite { sequence, index } => {
                write!(f, "non-finite entry {sequence}_{index}")
            }
            ValidationIssue::InvalidGenerator { reason } => write!(f, "invalid generator: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Number of `a` entries inspected (including `a_0`).
    pub a_checked: usize,
    pub b_checked: usize,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks `a_0 = 1`, positivity of every stored `a_n`, finiteness of all
/// entries, and generator parameters.
pub fn validate_coefficients(spec: &CoefficientSpec) -> ValidationReport {
    let mut issues = Vec::new();
    match spec.a.first() {
        None if spec.generator.is_none() => issues.push(ValidationIssue::MissingA0),
        None => {}
        Some(&a0) if a0 != 1.0 => issues.push(ValidationIssue::A0Convention { found: a0 }),
        Some(_) => {}
    }
    for (n, &v) in spec.a.iter().enumerate() {
        if !v.is_finite() {
            issues.push(ValidationIssue::NonFinite {
                sequence: "a".into(),
                index: n,
            });
        } else if n > 0 && v <= 0.0 {
            issues.push(ValidationIssue::NonPositiveOffDiagonal { index: n, value: v });
        }
    }
    for (i, &v) in spec.b.iter().enumerate() {
        if !v.is_finite() {
            issues.push(ValidationIssue::NonFinite {
                sequence: "b".into(),
                index: i + 1,
            });
        }
    }
    if let Some(Generator::Geometric { ratio, diagonal }) = spec.generator {
        if !(ratio.is_finite() && ratio > 0.0) {
            issues.push(ValidationIssue::InvalidGenerator {
                reason: format!("geometric ratio must be positive and finite, got {ratio}"),
            });
        }
        if !diagonal.is_finite() {
            issues.push(ValidationIssue::InvalidGenerator {
                reason: format!("geometric diagonal must be finite, got {diagonal}"),
            });
        }
    }
    ValidationReport {
        a_checked: spec.a.len(),
        b_checked: spec.b.len(),
        issues,
    }
}
