//! Numerical laboratory for trans-S-manifolds.
//!
//! A manifold is given by a coordinate chart carrying a metric `g`, a
//! `(1,1)`-tensor `f`, Reeb fields `xi_i` and one-forms `eta_i`. On top of
//! that the crate integrates magnetic (Lorentz) trajectories, computes their
//! Frenet apparatus and checks the structural theorems about Legendre
//! trajectories and C-parallel / C-proper mean curvature vector fields.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod diff;
pub mod error;
pub mod exec;
pub mod expr;
pub mod frenet;
pub mod geometry;
pub mod model;
pub mod model_file;
pub mod theorems;
pub mod trajectory;

pub use error::{Error, Result};
pub use exec::Execution;
pub use frenet::{classify_curve, compute_frenet, CurveClass, FrenetApparatus};
pub use geometry::{certify, check_framed_structure, extract_alpha_beta, StructureReport};
pub use model::{ChartDomain, FramedStructure, ManifoldModel, TangentVector};
pub use model_file::{parse_model, serialize_model, ModelSpec};
pub use trajectory::{integrate_trajectory, Trajectory};
