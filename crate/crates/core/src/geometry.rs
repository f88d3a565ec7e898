//! Levi-Civita connection and numerical verification of the framed
//! f-structure and trans-S identities on a coordinate chart.
//!
//! Every partial derivative of a component function is a central
//! difference with step [`diff::step_for`]. Residuals are reported, never
//! assumed away.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::diff::{five_point_weights, step_for};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{g_norm, inner, ManifoldModel, PointStructure, TangentVector};
use crate::trajectory::Trajectory;

/// Christoffel symbols of the second kind, `get(k, i, j) = Gamma^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// `Gamma^k_ij u^i v^j`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |k, _| {
            let mut acc = 0.0;
            for i in 0..d {
                if u[i] == 0.0 {
                    continue;
                }
                for j in 0..d {
                    acc += self.get(k, i, j) * u[i] * v[j];
                }
            }
            acc
        })
    }

    /// Connection matrix along axis `k`: `(G_k)^a_c = Gamma^a_kc`.
    pub fn along_axis(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |a, c| self.get(a, k, c))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Central-difference partials `d/dx^l F(x)` for `l = 0..dim`.
pub fn partials<F>(x: &[f64], eval: F) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|l| {
            let h = step_for(x[l]);
            probe[l] = x[l] + h;
            let plus = eval(&probe)?;
            probe[l] = x[l] - h;
            let minus = eval(&probe)?;
            probe[l] = x[l];
            Ok((plus - minus) / (2.0 * h))
        })
        .collect()
}

fn inverse_metric(g: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    let degenerate = || Error::DegenerateMetric {
        point: x.to_vec(),
        min_eigenvalue: min_eigenvalue(g),
    };
    let chol = g.clone().cholesky().ok_or_else(degenerate)?;
    let inv = chol.inverse();
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(degenerate());
    }
    Ok(inv)
}

pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let sym = (g + g.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// Levi-Civita Christoffel symbols at `point`.
pub fn christoffel(model: &ManifoldModel, point: &[f64]) -> Result<Christoffel> {
    model.ensure_in_domain(point)?;
    let g = model.metric(point)?;
    christoffel_unchecked(model, point, &g)
}

fn christoffel_unchecked(model: &ManifoldModel, x: &[f64], g: &DMatrix<f64>) -> Result<Christoffel> {
    let d = model.dim();
    let ginv = inverse_metric(g, x)?;
    let dg = partials(x, |p| model.metric(p))?;
    let mut gamma = Christoffel::zeros(d);
    let mut lowered = vec![0.0; d];
    for i in 0..d {
        for j in i..d {
            for (l, low) in lowered.iter_mut().enumerate() {
                *low = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
            }
            for k in 0..d {
                let v: f64 = (0..d).map(|l| ginv[(k, l)] * lowered[l]).sum();
                gamma.set(k, i, j, v);
                gamma.set(k, j, i, v);
            }
        }
    }
    Ok(gamma)
}

/// Connection data at a point: structure tensors, Christoffel symbols,
/// `nabla_k f` and `nabla_k xi_i` for every coordinate axis `k`.
#[derive(Debug, Clone)]
pub struct ConnectionJet {
    pub point: Vec<f64>,
    pub structure: PointStructure,
    pub gamma: Christoffel,
    /// `nabla_f[k]` is the matrix of `(nabla_{d_k} f)`.
    pub nabla_f: Vec<DMatrix<f64>>,
    /// `nabla_xi[k]` has columns `nabla_{d_k} xi_i`.
    pub nabla_xi: Vec<DMatrix<f64>>,
}

impl ConnectionJet {
    pub fn at(model: &ManifoldModel, x: &[f64]) -> Result<Self> {
        model.ensure_in_domain(x)?;
        let structure = model.frame_at(x)?;
        let gamma = christoffel_unchecked(model, x, &structure.g)?;
        let df = partials(x, |p| model.f_tensor(p))?;
        let dxi = partials(x, |p| model.xi(p))?;
        let mut nabla_f = Vec::with_capacity(x.len());
        let mut nabla_xi = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let gk = gamma.along_axis(k);
            nabla_f.push(&df[k] + &gk * &structure.f - &structure.f * &gk);
            nabla_xi.push(&dxi[k] + &gk * &structure.xi);
        }
        Ok(Self {
            point: x.to_vec(),
            structure,
            gamma,
            nabla_f,
            nabla_xi,
        })
    }

    fn dim(&self) -> usize {
        self.point.len()
    }

    fn s(&self) -> usize {
        self.structure.xi.ncols()
    }

    /// Basis terms of the trans-S identity for `X = d_k`, `Y = d_b`:
    /// `(A_i, B_i)` with `(nabla_X f)Y = sum alpha_i A_i + beta_i B_i`.
    fn identity_terms(&self, k: usize, b: usize) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let PointStructure { g, f, xi, eta } = &self.structure;
        let fx = f.column(k).into_owned();
        let fy = f.column(b).into_owned();
        let ffx = f * &fx;
        let g_fx_fy = inner(g, &fx, &fy);
        let g_fx_y = (g * &fx)[b];
        let mut a_terms = Vec::with_capacity(self.s());
        let mut b_terms = Vec::with_capacity(self.s());
        for i in 0..self.s() {
            let xi_i = xi.column(i).into_owned();
            let eta_y = eta[(i, b)];
            a_terms.push(&xi_i * g_fx_fy + &ffx * eta_y);
            b_terms.push(&xi_i * g_fx_y - &fx * eta_y);
        }
        (a_terms, b_terms)
    }

    /// Max over coordinate pairs of the g-norm defect of the trans-S
    /// identity with the given coefficients.
    pub fn trans_s_defect(&self, alpha: &DVector<f64>, beta: &DVector<f64>) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for b in 0..d {
                let (a_terms, b_terms) = self.identity_terms(k, b);
                let mut defect = self.nabla_f[k].column(b).into_owned();
                for i in 0..self.s() {
                    defect -= &a_terms[i] * alpha[i] + &b_terms[i] * beta[i];
                }
                worst = worst.max(g_norm(&self.structure.g, &defect));
            }
        }
        worst
    }

    /// Least-squares fit of `(alpha, beta)` over all `dim^2` basis pairs.
    pub fn fit_alpha_beta(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.dim();
        let s = self.s();
        let rows = d * d * d;
        let mut a = DMatrix::zeros(rows, 2 * s);
        let mut rhs = DVector::zeros(rows);
        for k in 0..d {
            for b in 0..d {
                let (a_terms, b_terms) = self.identity_terms(k, b);
                let base = (k * d + b) * d;
                for r in 0..d {
                    rhs[base + r] = self.nabla_f[k][(r, b)];
                    for i in 0..s {
                        a[(base + r, i)] = a_terms[i][r];
                        a[(base + r, s + i)] = b_terms[i][r];
                    }
                }
            }
        }
        let svd = a.svd(true, true);
        let sv = &svd.singular_values;
        let max_sv = sv.max();
        if !(max_sv > 0.0) || sv.min() <= 1e-10 * max_sv {
            return Err(Error::Underdetermined {
                point: self.point.clone(),
            });
        }
        let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::Underdetermined {
            point: self.point.clone(),
        })?;
        Ok((sol.rows(0, s).into_owned(), sol.rows(s, s).into_owned()))
    }
}

/// Fitted trans-S coefficients with the identity's residual.
#[derive(Debug, Clone)]
pub struct AlphaBeta {
    pub alpha: DVector<f64>,
    pub beta: DVector<f64>,
    pub residual: f64,
}

pub fn extract_alpha_beta(model: &ManifoldModel, point: &[f64]) -> Result<AlphaBeta> {
    let jet = ConnectionJet::at(model, point)?;
    let (alpha, beta) = jet.fit_alpha_beta()?;
    let residual = jet.trans_s_defect(&alpha, &beta);
    Ok(AlphaBeta { alpha, beta, residual })
}

/// Substitutes given coefficients into the defining identity.
pub fn trans_s_defect(model: &ManifoldModel, point: &[f64], alpha: &DVector<f64>, beta: &DVector<f64>) -> Result<f64> {
    Ok(ConnectionJet::at(model, point)?.trans_s_defect(alpha, beta))
}

/// Stored `(alpha, beta)` when the model knows them, fitted otherwise.
pub fn coefficients_at(model: &ManifoldModel, point: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
    match (model.stored_alpha(point), model.stored_beta(point)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => {
            let fit = extract_alpha_beta(model, point)?;
            Ok((fit.alpha, fit.beta))
        }
    }
}

/// `max_{k,i} |nabla_k xi_i + alpha_i f d_k + beta_i f^2 d_k|_g`.
pub fn check_xi_derivative(model: &ManifoldModel, point: &[f64]) -> Result<f64> {
    let jet = ConnectionJet::at(model, point)?;
    let (alpha, beta) = coefficients_at(model, point)?;
    Ok(xi_derivative_defect(&jet, &alpha, &beta))
}

fn xi_derivative_defect(jet: &ConnectionJet, alpha: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let f = &jet.structure.f;
    let ff = f * f;
    let mut worst: f64 = 0.0;
    for k in 0..jet.dim() {
        for i in 0..jet.s() {
            let defect = jet.nabla_xi[k].column(i) + f.column(k) * alpha[i] + ff.column(k) * beta[i];
            worst = worst.max(g_norm(&jet.structure.g, &defect.into_owned()));
        }
    }
    worst
}

/// `Omega(X, Y) = g(X, fY)`.
pub fn fundamental_two_form(model: &ManifoldModel, point: &[f64], x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let g = model.metric(point)?;
    let f = model.f_tensor(point)?;
    Ok(inner(&g, x, &(f * y)))
}

fn ensure_stencil(model: &ManifoldModel, point: &[f64]) -> Result<()> {
    let margin = point.iter().map(|v| step_for(*v)).fold(0.0, f64::max);
    if model.domain.contains_with_margin(point, margin) {
        Ok(())
    } else {
        Err(Error::OutsideDomain { point: point.to_vec() })
    }
}

/// Max defect of `d Omega = 2 Omega ^ sum beta_i eta_i` over coordinate
/// triples, using `dW_abc = d_a W_bc + d_b W_ca + d_c W_ab` and the matching
/// wedge convention.
pub fn check_d_omega(model: &ManifoldModel, point: &[f64]) -> Result<f64> {
    ensure_stencil(model, point)?;
    let omega_at = |p: &[f64]| -> Result<DMatrix<f64>> { Ok(model.metric(p)? * model.f_tensor(p)?) };
    let omega = omega_at(point)?;
    let d_omega = partials(point, omega_at)?;
    let eta = model.eta(point)?;
    let beta = match model.stored_beta(point) {
        Some(b) => b,
        None if model.n == 0 => DVector::zeros(model.s),
        None => extract_alpha_beta(model, point)?.beta,
    };
    let theta = eta.transpose() * &beta;
    let d = model.dim();
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let lhs = d_omega[a][(b, c)] + d_omega[b][(c, a)] + d_omega[c][(a, b)];
                let wedge = omega[(a, b)] * theta[c] + omega[(b, c)] * theta[a] + omega[(c, a)] * theta[b];
                worst = worst.max((lhs - 2.0 * wedge).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityResiduals {
    /// Defect of `[f,f] + 2 sum d eta_i (x) xi_i = sum_ij [eta_j(nabla xi_i) eta_j] xi_i`.
    pub identity: f64,
    /// `|[f,f] + 2 sum d eta_i (x) xi_i|`.
    pub s_structure: f64,
}

pub fn check_normality(model: &ManifoldModel, point: &[f64]) -> Result<NormalityResiduals> {
    ensure_stencil(model, point)?;
    let jet = ConnectionJet::at(model, point)?;
    let df = partials(point, |p| model.f_tensor(p))?;
    let deta = partials(point, |p| model.eta(p))?;
    let PointStructure { g, f, xi, eta } = &jet.structure;
    let d = model.dim();
    let s = model.s;
    // eta_j(nabla_k xi_i), indexed [k][(j, i)]
    let eta_nabla_xi: Vec<DMatrix<f64>> = jet.nabla_xi.iter().map(|m| eta * m).collect();

    let mut worst = NormalityResiduals {
        identity: 0.0,
        s_structure: 0.0,
    };
    for a in 0..d {
        for b in 0..d {
            let mut bracket = DVector::zeros(d);
            for c in 0..d {
                let mut v = 0.0;
                for k in 0..d {
                    v += f[(k, a)] * df[k][(c, b)]
                        - f[(k, b)] * df[k][(c, a)]
                        - f[(c, k)] * (df[a][(k, b)] - df[b][(k, a)]);
                }
                bracket[c] = v;
            }
            for i in 0..s {
                let d_eta = 0.5 * (deta[a][(i, b)] - deta[b][(i, a)]);
                bracket += xi.column(i) * (2.0 * d_eta);
            }
            let mut rhs = DVector::zeros(d);
            for i in 0..s {
                let coeff: f64 = (0..s)
                    .map(|j| eta_nabla_xi[a][(j, i)] * eta[(j, b)] - eta_nabla_xi[b][(j, i)] * eta[(j, a)])
                    .sum();
                rhs += xi.column(i) * coeff;
            }
            worst.s_structure = worst.s_structure.max(g_norm(g, &bracket));
            worst.identity = worst.identity.max(g_norm(g, &(bracket - rhs)));
        }
    }
    Ok(worst)
}

/// `max_k |d_k g(X,Y) - g(nabla_k X, Y) - g(X, nabla_k Y)|` for fields with
/// constant coordinate components.
pub fn metric_compatibility_defect(
    model: &ManifoldModel,
    point: &[f64],
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let gamma = christoffel(model, point)?;
    let g = model.metric(point)?;
    let dg = partials(point, |p| model.metric(p))?;
    let mut worst: f64 = 0.0;
    for (k, dgk) in dg.iter().enumerate() {
        let gk = gamma.along_axis(k);
        let lhs = inner(dgk, x, y);
        let rhs = inner(&g, &(&gk * x), y) + inner(&g, x, &(&gk * y));
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Covariant derivative of a field sampled along a curve, at one sample.
///
/// `dW/dt` uses the five-point stencil (one-sided near the ends).
pub fn covariant_derivative_along(
    model: &ManifoldModel,
    curve: &Trajectory,
    field: &[DVector<f64>],
    index: usize,
) -> Result<TangentVector> {
    let len = curve.len();
    if len < 5 || field.len() != len {
        return Err(Error::InsufficientSamples {
            needed: 5,
            got: len.min(field.len()),
        });
    }
    if index >= len {
        return Err(Error::Parameter(format!("sample index {index} out of range")));
    }
    let x = curve.position(index);
    let gamma = christoffel(model, x)?;
    let (start, w) = five_point_weights(index, len, curve.h);
    let mut dw = DVector::zeros(model.dim());
    for (c, sample) in w.iter().zip(&field[start..start + 5]) {
        dw += sample * *c;
    }
    let v = curve.velocity(index);
    let components = dw + gamma.contract(v, &field[index]);
    TangentVector::new(x.to_vec(), components)
}

/// One certification axiom and its worst residual over the sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomResidual {
    pub axiom: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub model: String,
    pub tolerance: f64,
    pub axioms: Vec<AxiomResidual>,
    pub sample_points: Vec<Vec<f64>>,
}

impl StructureReport {
    pub const DEFAULT_TOLERANCE: f64 = 1e-8;

    fn from_columns(
        model: &str,
        tolerance: f64,
        names: &[&str],
        columns: Vec<Vec<f64>>,
        points: Vec<Vec<f64>>,
    ) -> Self {
        let axioms = names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let residual = columns.iter().map(|row| row[i]).fold(0.0, nan_max);
                AxiomResidual {
                    axiom: (*name).to_string(),
                    residual,
                    passed: residual < tolerance,
                }
            })
            .collect();
        Self {
            model: model.to_string(),
            tolerance,
            axioms,
            sample_points: points,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        for a in &mut self.axioms {
            a.passed = a.residual < tolerance;
        }
        self
    }

    pub fn all_passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn residual(&self, axiom: &str) -> Option<f64> {
        self.axioms.iter().find(|a| a.axiom == axiom).map(|a| a.residual)
    }

    pub fn first_failure(&self) -> Option<&AxiomResidual> {
        self.axioms.iter().find(|a| !a.passed)
    }

    /// Plain-text residual table.
    pub fn table(&self) -> String {
        let mut out = format!("{:<40} {:>12}  status\n", "axiom", "residual");
        for a in &self.axioms {
            out.push_str(&format!(
                "{:<40} {:>12.3e}  {}\n",
                a.axiom,
                a.residual,
                if a.passed { "ok" } else { "FAIL" }
            ));
        }
        out
    }
}

// a NaN residual must never pass
fn nan_max(acc: f64, v: f64) -> f64 {
    if v.is_nan() || acc.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

pub const FRAMED_AXIOMS: [&str; 9] = [
    "eta_i(xi_j) = delta_ij",
    "f^2 = -I + sum eta_i (x) xi_i",
    "f(xi_i) = 0",
    "eta_i o f = 0",
    "g(fX,fY) = g(X,Y) - sum eta_i(X) eta_i(Y)",
    "eta_i(X) = g(X, xi_i)",
    "xi_i g-orthonormal",
    "metric symmetric",
    "metric positive definite",
];

fn framed_residuals(model: &ManifoldModel, x: &[f64]) -> Result<Vec<f64>> {
    model.ensure_in_domain(x)?;
    let PointStructure { g, f, xi, eta } = model.frame_at(x)?;
    let d = model.dim();
    let s = model.s;
    let id = DMatrix::<f64>::identity(d, d);
    let id_s = DMatrix::<f64>::identity(s, s);
    let xi_eta = &xi * &eta;
    let pd = if min_eigenvalue(&g) > 0.0 { 0.0 } else { f64::INFINITY };
    Ok(vec![
        (&eta * &xi - &id_s).norm(),
        (&f * &f + &id - &xi_eta).norm(),
        (&f * &xi).norm(),
        (&eta * &f).norm(),
        (f.transpose() * &g * &f - &g + eta.transpose() * &eta).norm(),
        (&eta - xi.transpose() * &g).norm(),
        (xi.transpose() * &g * &xi - &id_s).norm(),
        (&g - g.transpose()).norm(),
        pd,
    ])
}

/// Residuals of the framed metric f-structure axioms at the sample points.
pub fn check_framed_structure(model: &ManifoldModel, sample_points: &[Vec<f64>]) -> Result<StructureReport> {
    check_framed_structure_with(model, sample_points, Execution::default())
}

pub fn check_framed_structure_with(
    model: &ManifoldModel,
    sample_points: &[Vec<f64>],
    exec: Execution,
) -> Result<StructureReport> {
    if sample_points.is_empty() {
        return Err(Error::Parameter("need at least one sample point".into()));
    }
    let columns = exec
        .map(sample_points, |p| framed_residuals(model, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(StructureReport::from_columns(
        &model.name,
        StructureReport::DEFAULT_TOLERANCE,
        &FRAMED_AXIOMS,
        columns,
        sample_points.to_vec(),
    ))
}

pub const TRANS_S_AXIOMS: [&str; 5] = [
    "trans-S identity (fitted alpha, beta)",
    "nabla xi_i = -alpha_i f - beta_i f^2",
    "d Omega = 2 Omega ^ sum beta_i eta_i",
    "normality bracket identity",
    "[f,f] + 2 sum d eta_i (x) xi_i = 0",
];

fn trans_s_residuals(model: &ManifoldModel, x: &[f64]) -> Result<Vec<f64>> {
    let fit = extract_alpha_beta(model, x)?;
    let xi_defect = check_xi_derivative(model, x)?;
    let d_omega = check_d_omega(model, x)?;
    let normal = check_normality(model, x)?;
    Ok(vec![
        fit.residual,
        xi_defect,
        d_omega,
        normal.identity,
        normal.s_structure,
    ])
}

/// Full certification: framed axioms plus the trans-S identity, the
/// `nabla xi` formula, the `d Omega` identity and normality.
pub fn certify(
    model: &ManifoldModel,
    sample_points: &[Vec<f64>],
    tolerance: f64,
    exec: Execution,
) -> Result<StructureReport> {
    let framed = check_framed_structure_with(model, sample_points, exec)?;
    let columns = exec
        .map(sample_points, |p| trans_s_residuals(model, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let extra = StructureReport::from_columns(&model.name, tolerance, &TRANS_S_AXIOMS, columns, Vec::new());
    let mut report = framed.with_tolerance(tolerance);
    report.axioms.extend(extra.axioms);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{c_space, standard_s_space};

    #[test]
    fn euclidean_christoffel_vanishes() {
        let m = c_space(1, 1).unwrap();
        let g = christoffel(&m, &[0.3, -0.2, 1.0]).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn christoffel_outside_domain_is_an_error() {
        let m = c_space(1, 1).unwrap();
        assert!(matches!(
            christoffel(&m, &[1e6, 0.0, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn two_form_vanishes_on_xi_and_diagonal() {
        let m = standard_s_space(1, 2).unwrap();
        let p = [0.4, -0.7, 0.1, 0.2];
        let xi = m.xi(&p).unwrap();
        let x = DVector::from_vec(vec![0.3, 1.1, -0.4, 0.9]);
        for i in 0..2 {
            let v = fundamental_two_form(&m, &p, &x, &xi.column(i).into_owned()).unwrap();
            assert!(v.abs() < 1e-15);
        }
        assert!(fundamental_two_form(&m, &p, &x, &x).unwrap().abs() < 1e-14);
    }

    #[test]
    fn degenerate_structure_cannot_be_fitted() {
        use crate::model::{ChartDomain, FramedStructure};
        use std::sync::Arc;
        struct Flat;
        impl FramedStructure for Flat {
            fn metric(&self, _: &[f64]) -> Result<DMatrix<f64>> {
                Ok(DMatrix::identity(2, 2))
            }
            fn f_tensor(&self, _: &[f64]) -> Result<DMatrix<f64>> {
                Ok(DMatrix::zeros(2, 2))
            }
            fn xi(&self, _: &[f64]) -> Result<DMatrix<f64>> {
                Ok(DMatrix::identity(2, 2))
            }
            fn eta(&self, _: &[f64]) -> Result<DMatrix<f64>> {
                Ok(DMatrix::identity(2, 2))
            }
        }
        let m = ManifoldModel::new("f=0", 0, 2, ChartDomain::cube(2, 1.0), Arc::new(Flat)).unwrap();
        assert!(matches!(
            extract_alpha_beta(&m, &[0.1, 0.2]),
            Err(Error::Underdetermined { .. })
        ));
        // f = 0 and s = dim: both sides of the d Omega identity vanish
        assert_eq!(check_d_omega(&m, &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn d_omega_stencil_must_fit() {
        let m = c_space(1, 1).unwrap();
        let edge = m.domain.hi.clone();
        assert!(check_d_omega(&m, &edge).is_err());
        assert!(check_normality(&m, &edge).is_err());
    }
}
