//! Frenet frames, curvatures and osculating order of a sampled curve.
//!
//! Covariant derivatives along the curve use a five-point fourth-order
//! stencil on every `stride`-th sample. Each differentiation level
//! amplifies rounding noise in the Christoffel symbols by roughly
//! `1 / (stride h)`; a stride giving a stencil spacing near
//! [`TARGET_SPACING`] keeps the noise in `kappa_3` well below the default
//! rank tolerance while the truncation error stays `O((stride h)^4)`.

use nalgebra::DVector;
use serde::Serialize;

use crate::diff::strided_weights;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{christoffel, Christoffel};
use crate::model::{g_norm, inner, ManifoldModel};
use crate::trajectory::Trajectory;

pub const TARGET_SPACING: f64 = 0.02;
pub const MIN_SAMPLES: usize = 9;

/// `1e-4 * max(1, |q|)`.
pub fn default_rank_tol(q: f64) -> f64 {
    1e-4 * q.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrenetApparatus {
    /// Osculating order `r`.
    pub order: usize,
    pub times: Vec<f64>,
    /// `frames[j][t]` is `E_{j+1}` at sample `t`, `j < r`.
    pub frames: Vec<Vec<DVector<f64>>>,
    /// `curvatures[j][t]` is `kappa_{j+1}` at sample `t`, `j < r - 1`.
    pub curvatures: Vec<Vec<f64>>,
    /// `kappa_r`: the curvature that fell below the rank tolerance, or
    /// the normal-part defect of the last frame when `r = dim`.
    pub trailing_curvature: Vec<f64>,
    pub rank_tol: f64,
    pub stride: usize,
    /// Samples excluded at each end from suprema.
    pub margin: usize,
    /// Max over `j` of the Frenet-equation defect, per sample.
    pub residual: Vec<f64>,
    /// Sup over interior samples of the Gram-matrix defect.
    pub gram_defect: f64,
}

impl FrenetApparatus {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Interior sample indices used for suprema.
    pub fn interior(&self) -> std::ops::Range<usize> {
        interior_range(self.len(), self.margin)
    }

    /// `E_j` (1-based) at every sample, if `j <= r`.
    pub fn frame(&self, j: usize) -> Option<&[DVector<f64>]> {
        self.frames.get(j.checked_sub(1)?).map(Vec::as_slice)
    }

    /// `kappa_j` (1-based). `kappa_r` is the sub-tolerance trailing
    /// curvature; beyond that the value is zero.
    pub fn curvature(&self, j: usize, t: usize) -> f64 {
        let Some(k) = j.checked_sub(1) else { return 0.0 };
        if let Some(c) = self.curvatures.get(k) {
            c[t]
        } else if k == self.curvatures.len() {
            self.trailing_curvature.get(t).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn curvature_series(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|t| self.curvature(j, t)).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.interior().map(|t| self.residual[t]).fold(0.0, f64::max)
    }
}

pub(crate) fn interior_range(len: usize, margin: usize) -> std::ops::Range<usize> {
    if 2 * margin < len {
        margin..len - margin
    } else {
        let mid = len / 2;
        mid..mid + 1
    }
}

/// Stencil stride for a sample spacing `h` and series length `len`.
pub fn stride_for(h: f64, len: usize) -> usize {
    let wanted = (TARGET_SPACING / h).round().max(1.0) as usize;
    // keep room for several differentiation levels
    wanted.min(((len - 1) / 16).max(1)).min((len - 1) / 4).max(1)
}

/// Per-sample data shared by the Frenet computations.
struct CurveSamples<'a> {
    traj: &'a Trajectory,
    gammas: Vec<Christoffel>,
    metrics: Vec<nalgebra::DMatrix<f64>>,
    stride: usize,
}

impl<'a> CurveSamples<'a> {
    fn new(model: &ManifoldModel, traj: &'a Trajectory, exec: Execution) -> Result<Self> {
        let len = traj.len();
        if len < MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                needed: MIN_SAMPLES,
                got: len,
            });
        }
        let pairs = exec
            .map_range(len, |i| -> Result<_> {
                let x = traj.position(i);
                Ok((christoffel(model, x)?, model.metric(x)?))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let (gammas, metrics) = pairs.into_iter().unzip();
        Ok(Self {
            traj,
            gammas,
            metrics,
            stride: stride_for(traj.h, len),
        })
    }

    fn len(&self) -> usize {
        self.traj.len()
    }

    fn covariant_derivative(&self, field: &[DVector<f64>], exec: Execution) -> Vec<DVector<f64>> {
        let len = self.len();
        exec.map_range(len, |i| {
            let (idx, w) = strided_weights(i, len, self.traj.h, self.stride);
            let mut dw = self.gammas[i].contract(self.traj.velocity(i), &field[i]);
            for (j, c) in idx.iter().zip(&w) {
                dw += &field[*j] * *c;
            }
            dw
        })
    }
}

pub fn compute_frenet(model: &ManifoldModel, trajectory: &Trajectory, rank_tol: f64) -> Result<FrenetApparatus> {
    compute_frenet_with(model, trajectory, rank_tol, Execution::default())
}

pub fn compute_frenet_with(
    model: &ManifoldModel,
    trajectory: &Trajectory,
    rank_tol: f64,
    exec: Execution,
) -> Result<FrenetApparatus> {
    if !(rank_tol > 0.0) {
        return Err(Error::Parameter("rank tolerance must be positive".into()));
    }
    let cs = CurveSamples::new(model, trajectory, exec)?;
    let len = cs.len();
    let dim = model.dim();
    let stride = cs.stride;

    let e1: Vec<DVector<f64>> = (0..len)
        .map(|i| {
            let v = trajectory.velocity(i);
            v / g_norm(&cs.metrics[i], v)
        })
        .collect();
    let mut frames = vec![e1];
    let mut curvatures: Vec<Vec<f64>> = Vec::new();
    let trailing: Vec<f64>;
    let mut derivatives = Vec::new();

    loop {
        let j = frames.len();
        let current = &frames[j - 1];
        let d = cs.covariant_derivative(current, exec);
        let mut normal: Vec<DVector<f64>> = d.clone();
        if j >= 2 {
            let prev = &frames[j - 2];
            let kp = &curvatures[j - 2];
            for i in 0..len {
                normal[i] += &prev[i] * kp[i];
            }
        }
        derivatives.push(d);
        let kappa: Vec<f64> = (0..len).map(|i| g_norm(&cs.metrics[i], &normal[i])).collect();
        if j == dim {
            trailing = kappa;
            break;
        }
        let window = interior_range(len, 2 * stride * j);
        let sup = window.clone().map(|i| kappa[i]).fold(0.0, f64::max);
        if sup < rank_tol {
            trailing = kappa;
            break;
        }
        if window.clone().any(|i| kappa[i] < rank_tol) {
            let crossings = window
                .skip(1)
                .filter(|&i| (kappa[i] < rank_tol) != (kappa[i - 1] < rank_tol))
                .map(|i| trajectory.times[i])
                .collect();
            return Err(Error::VariableOrder {
                index: j,
                times: crossings,
            });
        }
        let next: Vec<DVector<f64>> = (0..len)
            .map(|i| {
                let g = &cs.metrics[i];
                let mut e = normal[i].clone();
                for prior in &frames {
                    let c = inner(g, &e, &prior[i]);
                    e -= &prior[i] * c;
                }
                let n = g_norm(g, &e);
                if n > 0.0 {
                    e / n
                } else {
                    e
                }
            })
            .collect();
        curvatures.push(kappa);
        frames.push(next);
    }

    let order = frames.len();
    let margin = (2 * stride * order).min(len.saturating_sub(1) / 2);
    let residual = frenet_defects(&cs.metrics, &frames, &curvatures, &derivatives);
    let mut apparatus = FrenetApparatus {
        order,
        times: trajectory.times.clone(),
        frames,
        curvatures,
        trailing_curvature: trailing,
        rank_tol,
        stride,
        margin,
        residual,
        gram_defect: 0.0,
    };
    apparatus.gram_defect = apparatus
        .interior()
        .map(|i| gram_defect(&cs.metrics[i], &apparatus, i))
        .fold(0.0, f64::max);
    Ok(apparatus)
}

fn gram_defect(g: &nalgebra::DMatrix<f64>, app: &FrenetApparatus, i: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, ea) in app.frames.iter().enumerate() {
        for (b, eb) in app.frames.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((inner(g, &ea[i], &eb[i]) - target).abs());
        }
    }
    worst
}

/// `max_j |nabla_T E_j + kappa_{j-1} E_{j-1} - kappa_j E_{j+1}|_g` per sample.
fn frenet_defects(
    metrics: &[nalgebra::DMatrix<f64>],
    frames: &[Vec<DVector<f64>>],
    curvatures: &[Vec<f64>],
    derivatives: &[Vec<DVector<f64>>],
) -> Vec<f64> {
    let len = metrics.len();
    let r = frames.len();
    (0..len)
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..r {
                let mut defect = derivatives[j][i].clone();
                if j >= 1 {
                    defect += &frames[j - 1][i] * curvatures[j - 1][i];
                }
                if j + 1 < r {
                    defect -= &frames[j + 1][i] * curvatures[j][i];
                }
                worst = worst.max(g_norm(&metrics[i], &defect));
            }
            worst
        })
        .collect()
}

/// Recomputes the Frenet-equation defect of a (possibly modified)
/// apparatus against the curve it claims to describe.
pub fn frenet_residual(
    model: &ManifoldModel,
    apparatus: &FrenetApparatus,
    trajectory: &Trajectory,
) -> Result<Vec<f64>> {
    let exec = Execution::default();
    let mut cs = CurveSamples::new(model, trajectory, exec)?;
    cs.stride = apparatus.stride;
    let derivatives: Vec<Vec<DVector<f64>>> = apparatus
        .frames
        .iter()
        .map(|f| cs.covariant_derivative(f, exec))
        .collect();
    Ok(frenet_defects(
        &cs.metrics,
        &apparatus.frames,
        &apparatus.curvatures,
        &derivatives,
    ))
}

/// `|nabla_T T + q f T|_g` per sample, with `nabla_T T = kappa_1 E_2`.
pub fn lorentz_residual(
    model: &ManifoldModel,
    apparatus: &FrenetApparatus,
    q: f64,
    trajectory: &Trajectory,
) -> Result<Vec<f64>> {
    (0..apparatus.len())
        .map(|i| {
            let x = trajectory.position(i);
            let t = &apparatus.frames[0][i];
            let mut v = model.f_tensor(x)? * t * q;
            if let Some(e2) = apparatus.frame(2) {
                v += &e2[i] * apparatus.curvature(1, i);
            }
            Ok(g_norm(&model.metric(x)?, &v))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "order", rename_all = "kebab-case")]
pub enum CurveClass {
    Geodesic,
    Circle,
    Helix(usize),
    Generic(usize),
}

impl std::fmt::Display for CurveClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveClass::Geodesic => write!(f, "geodesic"),
            CurveClass::Circle => write!(f, "circle"),
            CurveClass::Helix(3) => write!(f, "helix"),
            CurveClass::Helix(r) => write!(f, "helix of order {r}"),
            CurveClass::Generic(r) => write!(f, "generic Frenet curve of order {r}"),
        }
    }
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (mut n, mut sum) = (0usize, 0.0);
    for v in values.clone() {
        n += 1;
        sum += v;
    }
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    values.map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

pub fn classify_curve(apparatus: &FrenetApparatus, const_tol: f64) -> CurveClass {
    let r = apparatus.order;
    let window = apparatus.interior();
    let constant = |j: usize| spread(window.clone().map(|t| apparatus.curvature(j, t))) < const_tol;
    match r {
        1 => CurveClass::Geodesic,
        2 if constant(1) => CurveClass::Circle,
        2 => CurveClass::Generic(2),
        _ if (1..r).all(constant) => CurveClass::Helix(r),
        _ => CurveClass::Generic(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::c_space;
    use crate::trajectory::integrate_trajectory;

    fn circle() -> (ManifoldModel, Trajectory) {
        let m = c_space(1, 1).unwrap();
        let v0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let tr = integrate_trajectory(&m, &[0.0; 3], &v0, 2.0, 2.0, 1e-3).unwrap();
        (m, tr)
    }

    #[test]
    fn straight_line_is_a_geodesic() {
        let m = c_space(1, 1).unwrap();
        let v0 = DVector::from_vec(vec![0.6, 0.8, 0.0]);
        let tr = integrate_trajectory(&m, &[0.0; 3], &v0, 0.0, 1.0, 1e-3).unwrap();
        let app = compute_frenet(&m, &tr, 1e-4).unwrap();
        assert_eq!(app.order, 1);
        assert_eq!(classify_curve(&app, 1e-6), CurveClass::Geodesic);
        assert!(app.max_residual() < 1e-8);
    }

    #[test]
    fn planar_circle_has_curvature_two() {
        let (m, tr) = circle();
        let app = compute_frenet(&m, &tr, default_rank_tol(2.0)).unwrap();
        assert_eq!(app.order, 2);
        for t in app.interior() {
            assert!((app.curvature(1, t) - 2.0).abs() < 1e-4);
        }
        assert_eq!(classify_curve(&app, 1e-4), CurveClass::Circle);
        assert!(app.max_residual() < 1e-4);
        assert!(app.gram_defect < 1e-8);
    }

    #[test]
    fn scaled_curvature_is_detected() {
        let (m, tr) = circle();
        let mut app = compute_frenet(&m, &tr, default_rank_tol(2.0)).unwrap();
        for k in app.curvatures[0].iter_mut() {
            *k *= 1.5;
        }
        let res = frenet_residual(&m, &app, &tr).unwrap();
        for t in app.interior() {
            assert!(res[t] >= 0.5 * 2.0 * 0.999, "{}", res[t]);
        }
    }

    #[test]
    fn too_few_samples() {
        let m = c_space(1, 1).unwrap();
        let v0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let mut tr = integrate_trajectory(&m, &[0.0; 3], &v0, 2.0, 0.1, 1e-2).unwrap();
        tr.times.truncate(8);
        tr.positions.truncate(8);
        tr.velocities.truncate(8);
        assert!(matches!(
            compute_frenet(&m, &tr, 1e-4),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn classification_labels() {
        assert_eq!(CurveClass::Helix(3).to_string(), "helix");
        assert_eq!(CurveClass::Helix(4).to_string(), "helix of order 4");
    }
}
