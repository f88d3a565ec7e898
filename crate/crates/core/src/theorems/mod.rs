//! Theorem checks over a curve and its Frenet apparatus.
//!
//! Every check returns a [`TheoremReport`]: a list of named conditions with
//! residuals and tolerances, extracted scalars and functions, and a verdict.
//! The checks consume [`CurveData`], which can be evaluated from a model
//! and an integrated trajectory or assembled directly from frame data.

mod decompose;
mod legendre;
mod mean_curvature;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::diff::strided_derivative_series;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::frenet::{interior_range, FrenetApparatus};
use crate::geometry::coefficients_at;
use crate::model::{g_norm, inner, ManifoldModel};
use crate::trajectory::Trajectory;

pub use decompose::{decompose_xi_sum, XiDecomposition};
pub use legendre::check_legendre_trajectory;
pub use mean_curvature::{c_parallel_check, c_proper_check, Bundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    /// Passes when `value < tolerance`.
    Below,
    /// Passes when `value > tolerance`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    /// Sup over the tested window (or the bound being compared).
    pub value: f64,
    pub tolerance: f64,
    pub requirement: Requirement,
    pub evaluable: bool,
    pub passed: bool,
}

impl Condition {
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, tolerance, Requirement::Below)
    }

    pub fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, tolerance, Requirement::Above)
    }

    fn new(name: impl Into<String>, value: f64, tolerance: f64, requirement: Requirement) -> Self {
        let passed = match requirement {
            Requirement::Below => value < tolerance,
            Requirement::Above => value > tolerance,
        };
        Self {
            name: name.into(),
            value,
            tolerance,
            requirement,
            evaluable: true,
            passed,
        }
    }

    pub fn not_evaluable(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tolerance,
            requirement: Requirement::Below,
            evaluable: false,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails { condition: String },
    NotApplicable { reason: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Fails { condition } => write!(f, "fails ({condition})"),
            Verdict::NotApplicable { reason } => write!(f, "not applicable ({reason})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub conditions: Vec<Condition>,
    pub scalars: BTreeMap<String, f64>,
    /// Functions sampled on the curve grid (`t` holds the times).
    pub functions: BTreeMap<String, Vec<f64>>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl TheoremReport {
    fn new(theorem: &str) -> Self {
        Self {
            theorem: theorem.to_string(),
            conditions: Vec::new(),
            scalars: BTreeMap::new(),
            functions: BTreeMap::new(),
            notes: Vec::new(),
            verdict: Verdict::Holds,
        }
    }

    fn not_applicable(mut self, reason: impl Into<String>) -> Self {
        self.verdict = Verdict::NotApplicable { reason: reason.into() };
        self
    }

    fn push(&mut self, condition: Condition) {
        self.conditions.push(condition);
    }

    /// Sets the verdict from the evaluable conditions.
    fn conclude(mut self) -> Self {
        if let Verdict::NotApplicable { .. } = self.verdict {
            return self;
        }
        self.verdict = match self.conditions.iter().find(|c| c.evaluable && !c.passed) {
            Some(c) => Verdict::Fails {
                condition: c.name.clone(),
            },
            None => Verdict::Holds,
        };
        self
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

/// Per-sample geometric data along a curve, together with its apparatus.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub s: usize,
    /// Uniform sample spacing.
    pub h: f64,
    pub metrics: Vec<DMatrix<f64>>,
    /// `dim x s`, columns `xi_i`.
    pub xi: Vec<DMatrix<f64>>,
    pub alpha: Vec<DVector<f64>>,
    pub beta: Vec<DVector<f64>>,
    /// `f T` at each sample.
    pub f_tangent: Vec<DVector<f64>>,
    pub apparatus: FrenetApparatus,
}

impl CurveData {
    /// Evaluates the structure along an integrated trajectory. `alpha` and
    /// `beta` come from the model when stored and are fitted otherwise.
    pub fn from_curve(model: &ManifoldModel, trajectory: &Trajectory, apparatus: &FrenetApparatus) -> Result<Self> {
        Self::from_curve_with(model, trajectory, apparatus, Execution::default())
    }

    pub fn from_curve_with(
        model: &ManifoldModel,
        trajectory: &Trajectory,
        apparatus: &FrenetApparatus,
        exec: Execution,
    ) -> Result<Self> {
        if apparatus.len() != trajectory.len() {
            return Err(Error::Parameter("apparatus and trajectory differ in length".into()));
        }
        let samples = exec
            .map_range(trajectory.len(), |i| -> Result<_> {
                let x = trajectory.position(i);
                let (alpha, beta) = coefficients_at(model, x)?;
                let f_tangent = model.f_tensor(x)? * &apparatus.frames[0][i];
                Ok((model.metric(x)?, model.xi(x)?, alpha, beta, f_tangent))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut data = Self {
            s: model.s,
            h: trajectory.h,
            metrics: Vec::with_capacity(samples.len()),
            xi: Vec::with_capacity(samples.len()),
            alpha: Vec::with_capacity(samples.len()),
            beta: Vec::with_capacity(samples.len()),
            f_tangent: Vec::with_capacity(samples.len()),
            apparatus: apparatus.clone(),
        };
        for (g, xi, a, b, ft) in samples {
            data.metrics.push(g);
            data.xi.push(xi);
            data.alpha.push(a);
            data.beta.push(b);
            data.f_tangent.push(ft);
        }
        Ok(data)
    }

    /// Checks that all per-sample series have the apparatus length.
    pub fn validate(&self) -> Result<()> {
        let len = self.apparatus.len();
        let lens = [
            self.metrics.len(),
            self.xi.len(),
            self.alpha.len(),
            self.beta.len(),
            self.f_tangent.len(),
        ];
        if lens.iter().any(|&l| l != len) {
            return Err(Error::Parameter(format!(
                "curve data lengths {lens:?} differ from {len} samples"
            )));
        }
        if self.apparatus.order == 0 || self.apparatus.frames.len() != self.apparatus.order {
            return Err(Error::Parameter("apparatus has no frames".into()));
        }
        if !(self.h > 0.0) || self.s == 0 {
            return Err(Error::Parameter("sample spacing and s must be positive".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.apparatus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.apparatus.is_empty()
    }

    pub fn order(&self) -> usize {
        self.apparatus.order
    }

    /// Samples over which suprema are taken: the apparatus interior shrunk
    /// by two more stencil widths, since conditions may involve
    /// derivatives of up to second order of the curvatures.
    pub fn window(&self) -> std::ops::Range<usize> {
        interior_range(self.len(), self.apparatus.margin + 4 * self.apparatus.stride)
    }

    pub fn tangent(&self, t: usize) -> &DVector<f64> {
        &self.apparatus.frames[0][t]
    }

    /// `E_j` at sample `t` (1-based `j`), if `j <= r`.
    pub fn frame(&self, j: usize, t: usize) -> Option<&DVector<f64>> {
        self.apparatus.frame(j).map(|f| &f[t])
    }

    pub fn kappa(&self, j: usize) -> Vec<f64> {
        self.apparatus.curvature_series(j)
    }

    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        strided_derivative_series(values, self.h, self.apparatus.stride.max(1))
    }

    pub fn xi_sum(&self, t: usize) -> DVector<f64> {
        self.xi[t].column_sum()
    }

    pub fn alpha_sum(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.sum()).collect()
    }

    pub fn beta_sum(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.sum()).collect()
    }

    /// Mean of the `beta_i` at each sample.
    pub fn beta_mean(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.mean()).collect()
    }

    pub fn inner(&self, t: usize, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        inner(&self.metrics[t], u, v)
    }

    pub fn norm(&self, t: usize, u: &DVector<f64>) -> f64 {
        g_norm(&self.metrics[t], u)
    }

    /// `max_i |eta_i(T)| = max_i |g(T, xi_i)|` per sample.
    pub fn legendre_defect(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| {
                let tan = self.tangent(t);
                self.xi[t]
                    .column_iter()
                    .map(|c| self.inner(t, tan, &c.into_owned()).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn sup(&self, values: impl Fn(usize) -> f64) -> f64 {
        self.window().map(values).fold(0.0, f64::max)
    }

    pub fn inf(&self, values: impl Fn(usize) -> f64) -> f64 {
        self.window().map(values).fold(f64::INFINITY, f64::min)
    }

    /// `sup_t |v(t) - mean v|` over the window.
    pub fn spread(&self, values: &[f64]) -> f64 {
        let w = self.window();
        let mean = w.clone().map(|t| values[t]).sum::<f64>() / w.len() as f64;
        self.sup(|t| (values[t] - mean).abs())
    }

    pub fn window_mean(&self, values: &[f64]) -> f64 {
        let w = self.window();
        w.clone().map(|t| values[t]).sum::<f64>() / w.len() as f64
    }
}

/// Smaller of the two sign choices `sup_t residual(sign, t)`.
fn best_sign(data: &CurveData, residual: impl Fn(f64, usize) -> f64) -> (f64, f64) {
    let plus = data.sup(|t| residual(1.0, t));
    let minus = data.sup(|t| residual(-1.0, t));
    if plus <= minus {
        (1.0, plus)
    } else {
        (-1.0, minus)
    }
}

/// Unwraps an angle series so that successive jumps are below `pi`.
fn unwrap(angles: &mut [f64]) {
    use std::f64::consts::PI;
    let mut shift = 0.0;
    for i in 1..angles.len() {
        let jump = angles[i] + shift - angles[i - 1];
        shift -= 2.0 * PI * (jump / (2.0 * PI)).round();
        angles[i] += shift;
    }
}
