//! JSON model files.
//!
//! ```json
//! {
//!   "name": "c-space(1,1)", "n": 1, "s": 1,
//!   "domain": [[-50, 50], [-50, 50], [-50, 50]],
//!   "g":   [["1","0","0"], ["0","1","0"], ["0","0","1"]],
//!   "f":   [["0","-1","0"], ["1","0","0"], ["0","0","0"]],
//!   "xi":  [["0","0","1"]],
//!   "eta": [["0","0","1"]],
//!   "alpha": ["0"], "beta": ["0"],
//!   "sample_points": [[0, 0, 0]]
//! }
//! ```
//!
//! `xi` and `eta` are `s x dim`; `f[r][c]` is the component `f^r_c`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expression, ParseError};
use crate::geometry::check_framed_structure;
use crate::model::{ChartDomain, FramedStructure, ManifoldModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub n: usize,
    pub s: usize,
    pub domain: Vec<[f64; 2]>,
    pub g: Vec<Vec<String>>,
    pub f: Vec<Vec<String>>,
    pub xi: Vec<Vec<String>>,
    pub eta: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<String>>,
    #[serde(default)]
    pub sample_points: Vec<Vec<f64>>,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            if e.is_syntax() || e.is_eof() {
                Error::Expression(ParseError {
                    line: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                })
            } else {
                Error::ModelFile(e.to_string())
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }
}

#[derive(Debug)]
struct ExprMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Expression>,
}

impl ExprMatrix {
    fn compile(label: &str, text: &[Vec<String>], rows: usize, cols: usize, dim: usize) -> Result<Self> {
        if text.len() != rows || text.iter().any(|r| r.len() != cols) {
            return Err(Error::ModelFile(format!(
                "missing component: `{label}` must be {rows}x{cols}"
            )));
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for (r, row) in text.iter().enumerate() {
            for (c, src) in row.iter().enumerate() {
                entries.push(compile_one(&format!("{label}[{r}][{c}]"), src, dim)?);
            }
        }
        Ok(Self { rows, cols, entries })
    }

    fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self.entries[r * self.cols + c].eval(x)?;
            }
        }
        Ok(m)
    }
}

fn compile_one(label: &str, src: &str, dim: usize) -> Result<Expression> {
    let e = Expression::parse(src).map_err(|err| Error::ModelFile(format!("component {label}: {err}")))?;
    if let Some(v) = e.max_variable() {
        if v >= dim {
            return Err(Error::ModelFile(format!(
                "component {label}: x{} exceeds chart dimension {dim}",
                v + 1
            )));
        }
    }
    Ok(e)
}

fn compile_list(label: &str, text: &Option<Vec<String>>, s: usize, dim: usize) -> Result<Option<Vec<Expression>>> {
    let Some(list) = text else { return Ok(None) };
    if list.len() != s {
        return Err(Error::ModelFile(format!("`{label}` needs {s} entries")));
    }
    list.iter()
        .enumerate()
        .map(|(i, src)| compile_one(&format!("{label}[{i}]"), src, dim))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

#[derive(Debug)]
struct ExprStructure {
    g: ExprMatrix,
    f: ExprMatrix,
    // s x dim, transposed on evaluation
    xi: ExprMatrix,
    eta: ExprMatrix,
    alpha: Option<Vec<Expression>>,
    beta: Option<Vec<Expression>>,
}

fn eval_list(list: &Option<Vec<Expression>>, x: &[f64]) -> Option<DVector<f64>> {
    let list = list.as_ref()?;
    let vals: Result<Vec<f64>> = list.iter().map(|e| e.eval(x)).collect();
    vals.ok().map(DVector::from_vec)
}

impl FramedStructure for ExprStructure {
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.g.eval(x)
    }
    fn f_tensor(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.f.eval(x)
    }
    fn xi(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.xi.eval(x)?.transpose())
    }
    fn eta(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.eta.eval(x)
    }
    fn alpha(&self, x: &[f64]) -> Option<DVector<f64>> {
        eval_list(&self.alpha, x)
    }
    fn beta(&self, x: &[f64]) -> Option<DVector<f64>> {
        eval_list(&self.beta, x)
    }
}

/// Compiles a spec into a model without certifying it.
pub fn build_model(spec: &ModelSpec) -> Result<ManifoldModel> {
    let (n, s) = (spec.n, spec.s);
    if s == 0 {
        return Err(Error::ModelFile("s must be positive".into()));
    }
    let d = 2 * n + s;
    if spec.domain.len() != d {
        return Err(Error::ModelFile(format!("domain needs {d} intervals")));
    }
    let domain = ChartDomain::new(
        spec.domain.iter().map(|iv| iv[0]).collect(),
        spec.domain.iter().map(|iv| iv[1]).collect(),
    )?;
    let fields = ExprStructure {
        g: ExprMatrix::compile("g", &spec.g, d, d, d)?,
        f: ExprMatrix::compile("f", &spec.f, d, d, d)?,
        xi: ExprMatrix::compile("xi", &spec.xi, s, d, d)?,
        eta: ExprMatrix::compile("eta", &spec.eta, s, d, d)?,
        alpha: compile_list("alpha", &spec.alpha, s, d)?,
        beta: compile_list("beta", &spec.beta, s, d)?,
    };
    ManifoldModel::new(spec.name.clone(), n, s, domain, Arc::new(fields))
}

/// Compiles and certifies a model file. The framed-structure axioms are
/// checked at the declared sample points (the domain centre when none are
/// declared) with tolerance 1e-8.
pub fn parse_model(spec_text: &str) -> Result<ManifoldModel> {
    let spec = ModelSpec::from_json(spec_text)?;
    let model = build_model(&spec)?;
    let points = if spec.sample_points.is_empty() {
        vec![model
            .domain
            .lo
            .iter()
            .zip(&model.domain.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()]
    } else {
        spec.sample_points.clone()
    };
    let report = check_framed_structure(&model, &points)?;
    if let Some(fail) = report.first_failure() {
        return Err(Error::Certification {
            axiom: fail.axiom.clone(),
            residual: fail.residual,
            tolerance: report.tolerance,
            table: report.table(),
        });
    }
    Ok(model)
}

pub fn serialize_model(spec: &ModelSpec) -> String {
    spec.to_json()
}
