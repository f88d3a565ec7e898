//! Coordinate-chart description of a framed metric f-manifold.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Component functions of a framed metric f-structure on one chart.
///
/// All methods receive chart coordinates of length `dim = 2n + s`.
pub trait FramedStructure: Send + Sync {
    /// Components `g_ij` of the metric.
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    /// Components `f^i_j` of the (1,1) tensor; column `j` is `f(d/dx^j)`.
    fn f_tensor(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    /// `dim x s` matrix whose columns are the characteristic fields.
    fn xi(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    /// `s x dim` matrix whose rows are the dual one-forms.
    fn eta(&self, x: &[f64]) -> Result<DMatrix<f64>>;
    /// Analytically known `alpha_i`, if any.
    fn alpha(&self, _x: &[f64]) -> Option<DVector<f64>> {
        None
    }
    /// Analytically known `beta_i`, if any.
    fn beta(&self, _x: &[f64]) -> Option<DVector<f64>> {
        None
    }
}

/// Axis-aligned box of valid coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Parameter("chart domain needs lo < hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_margin(x, 0.0)
    }

    /// True when the box of half-width `margin` around `x` fits inside.
    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (lo, hi))| v.is_finite() && *v - margin >= *lo && *v + margin <= *hi)
    }

    /// Uniform random point, restricted to `[-clip, clip]` on each axis.
    pub fn sample<R: Rng>(&self, rng: &mut R, clip: f64) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| {
                let (a, b) = (lo.max(-clip), hi.min(clip));
                if a < b {
                    rng.gen_range(a..b)
                } else {
                    0.5 * (lo + hi)
                }
            })
            .collect()
    }
}

/// A framed metric f-manifold on a single chart.
#[derive(Clone)]
pub struct ManifoldModel {
    pub name: String,
    pub n: usize,
    pub s: usize,
    pub domain: ChartDomain,
    fields: Arc<dyn FramedStructure>,
}

impl fmt::Debug for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManifoldModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("s", &self.s)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ManifoldModel {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        s: usize,
        domain: ChartDomain,
        fields: Arc<dyn FramedStructure>,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::Parameter("s must be positive".into()));
        }
        if domain.dim() != 2 * n + s {
            return Err(Error::Parameter(format!(
                "chart domain has dimension {} but 2n+s = {}",
                domain.dim(),
                2 * n + s
            )));
        }
        Ok(Self {
            name: name.into(),
            n,
            s,
            domain,
            fields,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n + self.s
    }

    pub fn fields(&self) -> &Arc<dyn FramedStructure> {
        &self.fields
    }

    /// Same chart and name, different component functions.
    pub fn with_fields(&self, fields: Arc<dyn FramedStructure>) -> Self {
        Self { fields, ..self.clone() }
    }

    pub fn ensure_in_domain(&self, x: &[f64]) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { point: x.to_vec() })
        }
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.fields.metric(x)
    }

    pub fn f_tensor(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.fields.f_tensor(x)
    }

    pub fn xi(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.fields.xi(x)
    }

    pub fn eta(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.fields.eta(x)
    }

    pub fn stored_alpha(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.fields.alpha(x)
    }

    pub fn stored_beta(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.fields.beta(x)
    }

    /// Evaluates everything needed pointwise in one go.
    pub fn frame_at(&self, x: &[f64]) -> Result<PointStructure> {
        Ok(PointStructure {
            g: self.metric(x)?,
            f: self.f_tensor(x)?,
            xi: self.xi(x)?,
            eta: self.eta(x)?,
        })
    }
}

/// Structure tensors evaluated at one point.
#[derive(Debug, Clone)]
pub struct PointStructure {
    pub g: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    pub eta: DMatrix<f64>,
}

impl PointStructure {
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        inner(&self.g, u, v)
    }

    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// `sum_i xi_i`.
    pub fn xi_sum(&self) -> DVector<f64> {
        self.xi.column_sum()
    }
}

/// `g(u, v) = u^T g v`.
pub fn inner(g: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..v.len() {
        let mut row = 0.0;
        for i in 0..u.len() {
            row += u[i] * g[(i, j)];
        }
        acc += row * v[j];
    }
    acc
}

pub fn g_norm(g: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    inner(g, u, u).max(0.0).sqrt()
}

/// A coordinate vector attached to a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base_point: Vec<f64>,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base_point: Vec<f64>, components: DVector<f64>) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("tangent vector has non-finite components".into()));
        }
        Ok(Self { base_point, components })
    }
}
