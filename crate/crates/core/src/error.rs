use thiserror::Error;

use crate::expr::ParseError;
use crate::trajectory::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("degenerate metric at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    DegenerateMetric { point: Vec<f64>, min_eigenvalue: f64 },

    #[error("trans-S coefficients underdetermined at point {point:?}")]
    Underdetermined { point: Vec<f64> },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("left chart domain at t={t}")]
    LeftDomain { t: f64, partial: Box<Trajectory> },

    #[error("blow-up: non-finite state at t={t}")]
    BlowUp { t: f64 },

    #[error("no Legendre direction: projected vector has g-norm {norm:e}")]
    NoLegendreDirection { norm: f64 },

    #[error("variable osculating order: kappa_{index} crosses the rank tolerance at t = {times:?}")]
    VariableOrder { index: usize, times: Vec<f64> },

    #[error(transparent)]
    Expression(#[from] ParseError),

    #[error("domain error while evaluating expression: {0}")]
    EvalDomain(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("certification failed on axiom `{axiom}` (residual {residual:e} >= {tolerance:e})\n{table}")]
    Certification {
        axiom: String,
        residual: f64,
        tolerance: f64,
        table: String,
    },
}
