//! File formats shared with the command-line front end.
//!
//! JSON documents carry `"schema": "jacobi-bc/1"`. CSV numbers are written
//! with 17 significant digits so that doubles round-trip.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::connecting::ConnectingMatrix;
use crate::determinacy::DeterminacyReport;
use crate::dynamics::WaveField;
use crate::error::{Error, Result};
use crate::jacobi::{CoefficientSpec, Generator, JacobiCoefficients};
use crate::types::{BoundaryControl, MomentSequence, ResponseVector};

pub const SCHEMA: &str = "jacobi-bc/1";

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_line(fields: impl IntoIterator<Item = String>) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(fields.into_iter().collect::<Vec<_>>()).expect("in-memory csv write");
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

/// One row per site `n = 0..=rows` (row 0 is the control); columns
/// `re_t, im_t` for `t = 0..=T`.
pub fn wavefield_to_csv(field: &WaveField) -> String {
    let horizon = field.horizon();
    let mut out = csv_line(std::iter::once("n".to_string()).chain((0..=horizon).flat_map(|t| [format!("re_{t}"), format!("im_{t}")])));
    for n in 0..=field.rows() {
        out.push_str(&csv_line(std::iter::once(n.to_string()).chain((0..=horizon).flat_map(|t| {
            let v = field.get(n, t as isize);
            [fmt_num(v.re), fmt_num(v.im)]
        }))));
    }
    out
}

pub fn wavefield_to_json(field: &WaveField) -> Value {
    let grid = |part: fn(Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..=field.rows())
            .map(|n| (0..=field.horizon()).map(|t| part(field.get(n, t as isize))).collect())
            .collect()
    };
    json!({
        "schema": SCHEMA,
        "rows": field.rows(),
        "horizon": field.horizon(),
        "re": grid(|v| v.re),
        "im": grid(|v| v.im),
    })
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        out.push_str(&csv_line((0..m.ncols()).map(|j| fmt_num(m[(i, j)]))));
    }
    out
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Orientation goes into a leading `#` comment line.
pub fn connecting_to_csv(c: &ConnectingMatrix) -> String {
    let tag = serde_json::to_value(c.orientation()).expect("orientation serializes");
    format!("# orientation: {}\n{}", tag.as_str().unwrap_or_default(), matrix_to_csv(c.matrix()))
}

pub fn connecting_to_json(c: &ConnectingMatrix) -> Value {
    json!({
        "schema": SCHEMA,
        "orientation": c.orientation(),
        "dim": c.dim(),
        "matrix": matrix_rows(c.matrix()),
    })
}

pub fn matrix_to_json(name: &str, m: &DMatrix<f64>) -> Value {
    json!({ "schema": SCHEMA, "kind": name, "dim": m.nrows(), "matrix": matrix_rows(m) })
}

/// Columns `index, value`.
pub fn sequence_to_csv(values: &[f64], first_index: usize) -> String {
    let mut out = csv_line(["index".to_string(), "value".to_string()]);
    for (k, v) in values.iter().enumerate() {
        out.push_str(&csv_line([(k + first_index).to_string(), fmt_num(*v)]));
    }
    out
}

/// Columns `N, lambda, beta, gamma`.
pub fn determinacy_to_csv(report: &DeterminacyReport) -> String {
    let mut out = csv_line(["N", "lambda", "beta", "gamma"].map(String::from));
    for n in 0..report.n_max {
        out.push_str(&csv_line([
            (n + 1).to_string(),
            fmt_num(report.lambda_seq[n]),
            fmt_num(report.beta_seq[n]),
            fmt_num(report.gamma_seq[n]),
        ]));
    }
    out
}

pub fn determinacy_to_json(report: &DeterminacyReport) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["schema"] = json!(SCHEMA);
    v
}

/// Columns `re_z, im_z, re_value, im_value`.
pub fn grid_to_csv(points: &[(Complex64, Complex64)]) -> String {
    let mut out = csv_line(["re_z", "im_z", "re_value", "im_value"].map(String::from));
    for (z, v) in points {
        out.push_str(&csv_line([fmt_num(z.re), fmt_num(z.im), fmt_num(v.re), fmt_num(v.im)]));
    }
    out
}

pub fn grid_to_json(kind: &str, points: &[(Complex64, Complex64)]) -> Value {
    json!({
        "schema": SCHEMA,
        "kind": kind,
        "points": points.iter().map(|(z, v)| json!({"z": [z.re, z.im], "value": [v.re, v.im]})).collect::<Vec<_>>(),
    })
}

/// A control entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ControlValue {
    Real(f64),
    Complex([f64; 2]),
}

impl From<ControlValue> for Complex64 {
    fn from(v: ControlValue) -> Self {
        match v {
            ControlValue::Real(x) => Complex64::new(x, 0.0),
            ControlValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Input document. Every field is optional; each command reads the ones
/// it needs.
///
/// ```json
/// {"schema": "jacobi-bc/1", "a": [1.0, 2.0], "b": [0.0, 0.0],
///  "generator": {"kind": "geometric", "params": {"ratio": 2.0}},
///  "response": [1.0, 0.0, 0.0], "moments": [1.0, 0.0, 1.0],
///  "control": [1.0, [0.0, 1.0]]}
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InputDocument {
    #[serde(default)]
    pub schema: Option<String>,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub generator: Option<Generator>,
    #[serde(default)]
    pub response: Option<Vec<f64>>,
    #[serde(default)]
    pub moments: Option<Vec<f64>>,
    #[serde(default)]
    pub control: Option<Vec<ControlValue>>,
}

impl InputDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: InputDocument = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed input: {e}")))?;
        if let Some(s) = &doc.schema {
            if s != SCHEMA {
                return Err(Error::InvalidArgument(format!("unsupported schema `{s}`, expected `{SCHEMA}`")));
            }
        }
        Ok(doc)
    }

    pub fn has_coefficients(&self) -> bool {
        self.a.is_some() || self.b.is_some() || self.generator.is_some()
    }

    /// Validates and builds the coefficients.
    pub fn coefficients(&self) -> Result<JacobiCoefficients> {
        if !self.has_coefficients() {
            return Err(Error::InvalidArgument("input has no coefficients (`a`, `b`, `generator`)".into()));
        }
        let spec = CoefficientSpec {
            a: self.a.clone().unwrap_or_default(),
            b: self.b.clone().unwrap_or_default(),
            generator: self.generator,
        };
        let report = spec.validate();
        if !report.is_valid() {
            return Err(Error::InvalidCoefficients(report.to_string()));
        }
        spec.build()
    }

    pub fn response(&self) -> Result<ResponseVector> {
        self.response
            .clone()
            .map(ResponseVector)
            .ok_or_else(|| Error::InvalidArgument("input has no `response` array".into()))
    }

    pub fn moments(&self) -> Result<MomentSequence> {
        self.moments
            .clone()
            .map(MomentSequence)
            .ok_or_else(|| Error::InvalidArgument("input has no `moments` array".into()))
    }

    pub fn control(&self) -> Result<BoundaryControl> {
        let values = self
            .control
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("input has no `control` array".into()))?;
        BoundaryControl::new(values.iter().map(|&v| v.into()).collect())
    }
}

/// Sequence document `{"schema", "kind", "values"}`.
pub fn sequence_to_json(kind: &str, values: &[f64]) -> Value {
    json!({ "schema": SCHEMA, "kind": kind, "values": values })
}

/// Renders a JSON value with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    let _ = writeln!(s);
    s
}
