//! Lorentz trajectories `nabla_T T = -q f T`.
//!
//! Fixed-step classical RK4 on the first-order system `(x', v') = (v, a)`,
//! with `a^k = -Gamma^k_ij v^i v^j - q (f v)^k`. The velocity is never
//! renormalized; speed drift is measured by [`diagnostics`].

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::christoffel;
use crate::model::{g_norm, ManifoldModel, TangentVector};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model_name: String,
    pub q: f64,
    pub h: f64,
    pub times: Vec<f64>,
    pub positions: Vec<DVector<f64>>,
    pub velocities: Vec<DVector<f64>>,
}

impl Trajectory {
    /// Builds a trajectory from externally produced samples (e.g. a CSV
    /// file). Spacing must be uniform to 1e-9 relative.
    pub fn from_samples(
        model_name: impl Into<String>,
        q: f64,
        times: Vec<f64>,
        positions: Vec<DVector<f64>>,
        velocities: Vec<DVector<f64>>,
    ) -> Result<Self> {
        if times.len() < 2 || positions.len() != times.len() || velocities.len() != times.len() {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: times.len().min(positions.len()).min(velocities.len()),
            });
        }
        let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::Parameter("sample times must be strictly increasing".into()));
        }
        for (i, w) in times.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) + 1e-12 {
                return Err(Error::Parameter(format!("non-uniform sample spacing at row {}", i + 1)));
            }
        }
        Ok(Self {
            model_name: model_name.into(),
            q,
            h,
            times,
            positions,
            velocities,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        self.positions[i].as_slice()
    }

    pub fn velocity(&self, i: usize) -> &DVector<f64> {
        &self.velocities[i]
    }

    pub fn dim(&self) -> usize {
        self.positions.first().map_or(0, |p| p.len())
    }
}

pub fn lorentz_acceleration(model: &ManifoldModel, x: &[f64], v: &DVector<f64>, q: f64) -> Result<DVector<f64>> {
    let gamma = christoffel(model, x)?;
    let mut a = -gamma.contract(v, v);
    if q != 0.0 {
        a -= model.f_tensor(x)? * v * q;
    }
    Ok(a)
}

fn in_domain_acceleration(model: &ManifoldModel, x: &DVector<f64>, v: &DVector<f64>, q: f64) -> Result<DVector<f64>> {
    lorentz_acceleration(model, x.as_slice(), v, q)
}

/// Integrates a unit-speed Lorentz trajectory from `(x0, v0)`.
pub fn integrate_trajectory(
    model: &ManifoldModel,
    x0: &[f64],
    v0: &DVector<f64>,
    q: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Parameter(format!("step must be positive, got {h}")));
    }
    if !(t_end >= 10.0 * h) {
        return Err(Error::Parameter(format!("t_end = {t_end} must be at least 10 h")));
    }
    if !q.is_finite() {
        return Err(Error::Parameter("q must be finite".into()));
    }
    model.ensure_in_domain(x0)?;
    if v0.len() != model.dim() {
        return Err(Error::Parameter("initial velocity has wrong dimension".into()));
    }
    let speed = g_norm(&model.metric(x0)?, v0);
    if (speed - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(format!(
            "initial velocity must be unit, |v0|_g = {speed}"
        )));
    }

    let steps = (t_end / h - 1e-9).ceil() as usize;
    let mut traj = Trajectory {
        model_name: model.name.clone(),
        q,
        h,
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
    };
    let mut x = DVector::from_column_slice(x0);
    let mut v = v0.clone();
    traj.times.push(0.0);
    traj.positions.push(x.clone());
    traj.velocities.push(v.clone());

    for step in 1..=steps {
        let t = step as f64 * h;
        let left = |traj: &Trajectory| Error::LeftDomain {
            t,
            partial: Box::new(traj.clone()),
        };
        let stage = |xs: &DVector<f64>, vs: &DVector<f64>| -> Result<DVector<f64>> {
            match in_domain_acceleration(model, xs, vs, q) {
                Err(Error::OutsideDomain { .. }) => Err(Error::OutsideDomain { point: Vec::new() }),
                other => other,
            }
        };
        let rk = (|| -> Result<(DVector<f64>, DVector<f64>)> {
            let k1x = v.clone();
            let k1v = stage(&x, &v)?;
            let x2 = &x + &k1x * (0.5 * h);
            let k2x = &v + &k1v * (0.5 * h);
            let k2v = stage(&x2, &k2x)?;
            let x3 = &x + &k2x * (0.5 * h);
            let k3x = &v + &k2v * (0.5 * h);
            let k3v = stage(&x3, &k3x)?;
            let x4 = &x + &k3x * h;
            let k4x = &v + &k3v * h;
            let k4v = stage(&x4, &k4x)?;
            let nx = &x + (k1x + &k2x * 2.0 + &k3x * 2.0 + k4x) * (h / 6.0);
            let nv = &v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
            Ok((nx, nv))
        })();
        let (nx, nv) = match rk {
            Ok(state) => state,
            Err(Error::OutsideDomain { .. }) => return Err(left(&traj)),
            Err(e) => return Err(e),
        };
        if nx.iter().chain(nv.iter()).any(|c| !c.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        if !model.domain.contains(nx.as_slice()) {
            return Err(left(&traj));
        }
        x = nx;
        v = nv;
        traj.times.push(t);
        traj.positions.push(x.clone());
        traj.velocities.push(v.clone());
    }
    Ok(traj)
}

/// Initial data for a batch run.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub x0: Vec<f64>,
    pub v0: DVector<f64>,
    pub q: f64,
}

pub fn integrate_many(
    model: &ManifoldModel,
    inits: &[InitialData],
    t_end: f64,
    h: f64,
    exec: Execution,
) -> Vec<Result<Trajectory>> {
    exec.map(inits, |init| {
        integrate_trajectory(model, &init.x0, &init.v0, init.q, t_end, h)
    })
}

/// `(v - sum eta_i(v) xi_i) / |...|_g`.
pub fn legendre_project(model: &ManifoldModel, x: &[f64], v: &DVector<f64>) -> Result<TangentVector> {
    model.ensure_in_domain(x)?;
    let ps = model.frame_at(x)?;
    let project = |w: &DVector<f64>| -> DVector<f64> {
        let coeffs = &ps.eta * w;
        w - &ps.xi * coeffs
    };
    let w = project(v);
    let norm = ps.norm(&w);
    if !(norm >= 1e-10) {
        return Err(Error::NoLegendreDirection { norm });
    }
    let mut u = w / norm;
    // second pass removes rounding left by the first projection
    let eta_u = &ps.eta * &u;
    if eta_u.amax() > 0.0 {
        u = project(&u);
        let n2 = ps.norm(&u);
        u /= n2;
    }
    TangentVector::new(x.to_vec(), u)
}

/// Uniformly random unit direction (in coordinates), projected to a unit
/// Legendre vector.
pub fn random_legendre_direction<R: Rng>(model: &ManifoldModel, x: &[f64], rng: &mut R) -> Result<TangentVector> {
    let d = model.dim();
    for _ in 0..1000 {
        let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            match legendre_project(model, x, &(v / r)) {
                Err(Error::NoLegendreDirection { .. }) => continue,
                other => return other,
            }
        }
    }
    Err(Error::NoLegendreDirection { norm: 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsTable {
    pub times: Vec<f64>,
    pub speed: Vec<f64>,
    /// `eta[t][i] = eta_i(T)`.
    pub eta: Vec<Vec<f64>>,
    /// `contact_angle[t][i] = arccos g(T, xi_i)`.
    pub contact_angle: Vec<Vec<f64>>,
    pub speed_drift: f64,
    pub legendre_defect: f64,
}

pub fn diagnostics(model: &ManifoldModel, trajectory: &Trajectory) -> Result<DiagnosticsTable> {
    diagnostics_with(model, trajectory, Execution::default())
}

pub fn diagnostics_with(model: &ManifoldModel, trajectory: &Trajectory, exec: Execution) -> Result<DiagnosticsTable> {
    let rows = exec
        .map_range(trajectory.len(), |i| -> Result<(f64, Vec<f64>)> {
            let x = trajectory.position(i);
            let v = trajectory.velocity(i);
            let speed = g_norm(&model.metric(x)?, v);
            let eta = (model.eta(x)? * v).iter().copied().collect();
            Ok((speed, eta))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut table = DiagnosticsTable {
        times: trajectory.times.clone(),
        speed: Vec::with_capacity(rows.len()),
        eta: Vec::with_capacity(rows.len()),
        contact_angle: Vec::with_capacity(rows.len()),
        speed_drift: 0.0,
        legendre_defect: 0.0,
    };
    for (speed, eta) in rows {
        table.speed_drift = table.speed_drift.max((speed - 1.0).abs());
        for e in &eta {
            table.legendre_defect = table.legendre_defect.max(e.abs());
        }
        table
            .contact_angle
            .push(eta.iter().map(|e| e.clamp(-1.0, 1.0).acos()).collect());
        table.eta.push(eta);
        table.speed.push(speed);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{c_space, standard_s_space};

    #[test]
    fn flat_geodesic_is_a_straight_line() {
        let m = c_space(1, 1).unwrap();
        let v0 = DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let tr = integrate_trajectory(&m, &[0.0, 0.0, 0.0], &v0, 0.0, 1.0, 1e-2).unwrap();
        assert_eq!(tr.len(), 101);
        let end = &tr.positions[100];
        assert!((end - &v0).norm() < 1e-10);
    }

    #[test]
    fn acceleration_along_xi_has_no_force_term() {
        let m = standard_s_space(1, 1).unwrap();
        let x = [0.3, 0.4, 0.1];
        let xi = m.xi(&x).unwrap().column(0).into_owned();
        let a0 = lorentz_acceleration(&m, &x, &xi, 0.0).unwrap();
        let a5 = lorentz_acceleration(&m, &x, &xi, 5.0).unwrap();
        assert!((a0 - a5).norm() < 1e-14);
    }

    #[test]
    fn precondition_errors() {
        let m = c_space(1, 1).unwrap();
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(integrate_trajectory(&m, &[0.0; 3], &(v.clone() * 2.0), 1.0, 1.0, 1e-2).is_err());
        assert!(integrate_trajectory(&m, &[0.0; 3], &v, 1.0, 0.05, 1e-2).is_err());
        assert!(integrate_trajectory(&m, &[0.0; 3], &v, 1.0, 1.0, 0.0).is_err());
        assert!(integrate_trajectory(&m, &[99.0, 0.0, 0.0], &v, 1.0, 1.0, 1e-2).is_err());
    }

    #[test]
    fn leaving_the_chart_returns_partial_result() {
        let m = c_space(1, 1).unwrap();
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        match integrate_trajectory(&m, &[49.0, 0.0, 0.0], &v, 0.0, 5.0, 1e-2) {
            Err(Error::LeftDomain { t, partial }) => {
                assert!((t - 1.01).abs() < 1e-9, "{t}");
                assert_eq!(partial.len(), 101);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projection_errors_on_xi() {
        let m = standard_s_space(1, 2).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        let xi = m.xi(&x).unwrap().column(0).into_owned();
        assert!(matches!(
            legendre_project(&m, &x, &xi),
            Err(Error::NoLegendreDirection { .. })
        ));
    }

    #[test]
    fn projection_is_idempotent() {
        let m = standard_s_space(1, 2).unwrap();
        let x = [0.1, -0.2, 0.3, 0.4];
        let v = DVector::from_vec(vec![0.3, 1.0, -0.2, 0.5]);
        let u = legendre_project(&m, &x, &v).unwrap().components;
        let u2 = legendre_project(&m, &x, &u).unwrap().components;
        assert!((u - u2).amax() < 1e-14);
    }

    #[test]
    fn contact_angle_of_xi_flow_is_zero() {
        let m = c_space(1, 1).unwrap();
        let xi = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let tr = integrate_trajectory(&m, &[0.0; 3], &xi, 0.0, 1.0, 1e-2).unwrap();
        let d = diagnostics(&m, &tr).unwrap();
        assert!(d.contact_angle.iter().all(|row| row[0].abs() < 1e-12));
    }
}
