//! C-parallel and C-proper mean curvature checks.
//!
//! The left-hand side `L` of each characterization is assembled from the
//! Frenet data as `c_T T + c_2 E_2 + c_3 E_3 + c_4 E_4`, and `lambda` is
//! the pointwise least-squares coefficient of `L` against `sum xi_i`.

use nalgebra::DVector;
use serde::Serialize;

use super::decompose::{decompose_xi_sum, XiDecomposition};
use super::{best_sign, Condition, CurveData, TheoremReport};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bundle {
    Tangent,
    Normal,
}

const OBSTRUCTION_SLACK: f64 = 1e-6;

struct Kappas {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k1p: Vec<f64>,
    k1pp: Vec<f64>,
    k2p: Vec<f64>,
}

impl Kappas {
    fn new(data: &CurveData) -> Self {
        let k1 = data.kappa(1);
        let k2 = data.kappa(2);
        let k1p = data.derivative(&k1);
        let k1pp = data.derivative(&k1p);
        let k2p = data.derivative(&k2);
        Self {
            k3: data.kappa(3),
            k4: data.kappa(4),
            k1,
            k2,
            k1p,
            k1pp,
            k2p,
        }
    }
}

/// Coefficients of `L` along `T, E_2, E_3, E_4`.
type LeftSide = [Vec<f64>; 4];

fn left_side(k: &Kappas, proper: bool, bundle: Bundle) -> LeftSide {
    let len = k.k1.len();
    let map = |f: &dyn Fn(usize) -> f64| (0..len).map(f).collect::<Vec<f64>>();
    let tangent = bundle == Bundle::Tangent;
    if proper {
        [
            map(&|t| if tangent { 3.0 * k.k1[t] * k.k1p[t] } else { 0.0 }),
            map(&|t| {
                let cubic = if tangent { k.k1[t].powi(3) } else { 0.0 };
                cubic + k.k1[t] * k.k2[t] * k.k2[t] - k.k1pp[t]
            }),
            map(&|t| -(2.0 * k.k1p[t] * k.k2[t] + k.k1[t] * k.k2p[t])),
            map(&|t| -k.k1[t] * k.k2[t] * k.k3[t]),
        ]
    } else {
        [
            map(&|t| if tangent { -k.k1[t] * k.k1[t] } else { 0.0 }),
            k.k1p.clone(),
            map(&|t| k.k1[t] * k.k2[t]),
            vec![0.0; len],
        ]
    }
}

struct Fit {
    lambda: Vec<f64>,
    residual: Vec<f64>,
}

/// Pointwise `lambda = g(L, sum xi) / g(sum xi, sum xi)` and `|L - lambda sum xi|_g`.
fn fit_lambda(data: &CurveData, left: &LeftSide) -> Fit {
    let len = data.len();
    let mut lambda = vec![0.0; len];
    let mut residual = vec![0.0; len];
    for t in 0..len {
        let mut l = data.tangent(t) * left[0][t];
        for (j, c) in left.iter().enumerate().skip(1) {
            if let Some(e) = data.frame(j + 1, t) {
                l += e * c[t];
            }
        }
        let sum = data.xi_sum(t);
        lambda[t] = data.inner(t, &l, &sum) / data.inner(t, &sum, &sum);
        residual[t] = data.norm(t, &(l - sum * lambda[t]));
    }
    Fit { lambda, residual }
}

fn record_fit(report: &mut TheoremReport, data: &CurveData, fit: &Fit, fit_tol: f64, tol: f64) {
    report.push(Condition::below(
        "L = lambda sum xi_i (fitted residual)",
        data.sup(|t| fit.residual[t]),
        fit_tol,
    ));
    report.push(Condition::above(
        "lambda non-vanishing: min |lambda|",
        data.inf(|t| fit.lambda[t].abs()),
        tol,
    ));
    let zeros: Vec<f64> = data
        .window()
        .filter(|&t| fit.lambda[t].abs() <= tol)
        .map(|t| data.apparatus.times[t])
        .collect();
    if !zeros.is_empty() && zeros.len() < data.window().len() {
        report.notes.push(format!(
            "lambda vanishes at {} samples, first at t = {}, last at t = {}",
            zeros.len(),
            zeros[0],
            zeros[zeros.len() - 1]
        ));
    }
    report.functions.insert("lambda".into(), fit.lambda.clone());
    report.functions.insert("fit_residual".into(), fit.residual.clone());
}

fn start(theorem: &str, data: &CurveData) -> TheoremReport {
    let mut report = TheoremReport::new(theorem);
    report.scalars.insert("order".into(), data.order() as f64);
    report.functions.insert("t".into(), data.apparatus.times.clone());
    report
}

fn is_legendre(data: &CurveData, tol: f64) -> bool {
    let defect = data.legendre_defect();
    data.sup(|t| defect[t]) < tol
}

/// C-parallel mean curvature vector field: `nabla_T H = lambda sum xi_i`
/// (tangent bundle) or its normal part (normal bundle).
pub fn c_parallel_check(data: &CurveData, bundle: Bundle, tol: f64) -> Result<TheoremReport> {
    data.validate()?;
    let theorem = match bundle {
        Bundle::Tangent => "c-parallel-tangent",
        Bundle::Normal => "c-parallel-normal",
    };
    let mut report = start(theorem, data);
    let k = Kappas::new(data);
    let left = left_side(&k, false, bundle);
    let fit = fit_lambda(data, &left);
    record_fit(&mut report, data, &fit, tol, tol);
    let legendre = is_legendre(data, tol);
    let r = data.order();

    match bundle {
        Bundle::Tangent => {
            if legendre && data.inf(|t| k.k1[t]) > data.apparatus.rank_tol {
                // T is orthogonal to sum xi, so the T-component -kappa_1^2 survives the fit
                let ratio = data.inf(|t| fit.residual[t] / (k.k1[t] * k.k1[t]));
                report.scalars.insert("obstruction_ratio".into(), ratio);
                if ratio >= 1.0 - OBSTRUCTION_SLACK {
                    report
                        .notes
                        .push("nonexistence confirmed: residual >= kappa_1^2 along the curve".into());
                } else {
                    report
                        .notes
                        .push(format!("obstruction bound violated: residual / kappa_1^2 = {ratio}"));
                }
            } else if !legendre {
                report
                    .notes
                    .push("curve is not Legendre; only the defining equation is checked".into());
            }
        }
        Bundle::Normal => {
            if !legendre {
                report
                    .notes
                    .push("curve is not Legendre; only the defining equation is checked".into());
            } else if r == 2 {
                report.notes.push("osculating order 2 system".into());
                rank_two_system(&mut report, data, &k, tol);
                let beta = data.beta_mean();
                let beta_p = data.derivative(&beta);
                report.push(Condition::below(
                    "lambda = -beta'",
                    data.sup(|t| (fit.lambda[t] + beta_p[t]).abs()),
                    tol,
                ));
            } else if r >= 3 {
                report.notes.push("osculating order >= 3 system".into());
                let dec = decompose_xi_sum(data)?;
                let x: Vec<f64> = (0..data.len()).map(|t| -k.k1[t] * k.k1p[t]).collect();
                two_term_system(
                    &mut report,
                    data,
                    &k,
                    &dec,
                    &fit,
                    &x,
                    "lambda sum beta_i = -kappa_1 kappa_1'",
                    tol,
                    tol,
                );
            }
        }
    }
    Ok(report.conclude())
}

/// C-proper mean curvature vector field, in the tangent bundle
/// (`Delta H = lambda sum xi_i`) or the normal bundle. The normal-bundle
/// systems are the mechanical analogue of the tangent-bundle ones.
pub fn c_proper_check(data: &CurveData, bundle: Bundle, tol: f64) -> Result<TheoremReport> {
    data.validate()?;
    let theorem = match bundle {
        Bundle::Tangent => "c-proper-tangent",
        Bundle::Normal => "c-proper-normal",
    };
    let mut report = start(theorem, data);
    let k = Kappas::new(data);
    let left = left_side(&k, true, bundle);
    let fit = fit_lambda(data, &left);
    let loose = 10.0 * tol;
    record_fit(&mut report, data, &fit, loose, tol);
    if bundle == Bundle::Tangent {
        report.push(Condition::below("kappa_1 constant", data.spread(&k.k1), tol));
    } else {
        report
            .notes
            .push("derived-by-analogy: normal-bundle systems follow the tangent-bundle procedure".into());
    }
    if !is_legendre(data, tol) {
        report
            .notes
            .push("curve is not Legendre; only the defining equation is checked".into());
        return Ok(report.conclude());
    }
    let r = data.order();
    let len = data.len();
    let s = data.s as f64;
    if r == 2 {
        report.notes.push("osculating order 2 system".into());
        rank_two_system(&mut report, data, &k, tol);
        let alpha_sum = data.alpha_sum();
        report.push(Condition::below(
            "sum alpha_i = 0",
            data.sup(|t| alpha_sum[t].abs()),
            tol,
        ));
        let beta = data.beta_mean();
        match bundle {
            Bundle::Tangent => {
                report.push(Condition::below(
                    "lambda = -s beta^3",
                    data.sup(|t| (fit.lambda[t] + s * beta[t].powi(3)).abs()),
                    tol,
                ));
                report.push(Condition::below("lambda constant", data.spread(&fit.lambda), tol));
            }
            Bundle::Normal => {
                let beta_pp = data.derivative(&data.derivative(&beta));
                report.push(Condition::below(
                    "lambda = beta''",
                    data.sup(|t| (fit.lambda[t] - beta_pp[t]).abs()),
                    loose,
                ));
            }
        }
    } else if r == 3 {
        report.notes.push("osculating order 3 system".into());
        let dec = decompose_xi_sum(data)?;
        let (x, name): (Vec<f64>, _) = match bundle {
            Bundle::Tangent => (
                (0..len)
                    .map(|t| -k.k1[t].powi(2) * (k.k1[t].powi(2) + k.k2[t].powi(2)))
                    .collect(),
                "lambda sum beta_i = -kappa_1^2 (kappa_1^2 + kappa_2^2)",
            ),
            Bundle::Normal => (
                (0..len)
                    .map(|t| -k.k1[t] * (k.k1[t] * k.k2[t].powi(2) - k.k1pp[t]))
                    .collect(),
                "lambda sum beta_i = -kappa_1 (kappa_1 kappa_2^2 - kappa_1'')",
            ),
        };
        let lambda_tol = if bundle == Bundle::Normal { loose } else { tol };
        two_term_system(&mut report, data, &k, &dec, &fit, &x, name, lambda_tol, tol);
    } else if r >= 4 {
        report.notes.push("osculating order >= 4 system".into());
        let dec = decompose_xi_sum(data)?;
        three_term_system(&mut report, data, &k, &dec, &fit, bundle, tol);
    }
    Ok(report.conclude())
}

/// `beta_i` all equal, `sum xi_i = +-sqrt(s) E_2`, `kappa_1 = -+sqrt(s) beta`.
fn rank_two_system(report: &mut TheoremReport, data: &CurveData, k: &Kappas, tol: f64) {
    let root_s = (data.s as f64).sqrt();
    let beta = data.beta_mean();
    report.push(Condition::below(
        "beta_1 = ... = beta_s",
        data.sup(|t| data.beta[t].iter().map(|b| (b - beta[t]).abs()).fold(0.0, f64::max)),
        tol,
    ));
    let e2 = data.apparatus.frame(2).expect("order 2");
    let (sign, res) = best_sign(data, |e, t| data.norm(t, &(data.xi_sum(t) - &e2[t] * (e * root_s))));
    report.push(Condition::below("sum xi_i = +-sqrt(s) E_2", res, tol));
    report.scalars.insert("sign_xi_sum".into(), sign);
    let (sign, res) = best_sign(data, |e, t| (k.k1[t] + e * root_s * beta[t]).abs());
    report.push(Condition::below("kappa_1 = -+sqrt(s) beta", res, tol));
    report.scalars.insert("sign_kappa_1".into(), sign);
    report.scalars.insert("beta".into(), data.window_mean(&beta));
    report.functions.insert("beta".into(), beta);
}

/// `sum xi_i = sqrt(s)(cos w E_2 + sin w E_3)` and its consequences, with
/// `lambda sum beta_i = x(t)` as the `lambda` relation.
#[allow(clippy::too_many_arguments)]
fn two_term_system(
    report: &mut TheoremReport,
    data: &CurveData,
    k: &Kappas,
    dec: &XiDecomposition,
    fit: &Fit,
    x: &[f64],
    lambda_name: &str,
    lambda_tol: f64,
    tol: f64,
) {
    let root_s = (data.s as f64).sqrt();
    let w = &dec.w_signed;
    let w_p = data.derivative(w);
    let beta_sum = data.beta_sum();
    let alpha_sum = data.alpha_sum();
    report.push(Condition::below(
        "sum xi_i in span{E_2, E_3}",
        data.sup(|t| dec.residual_two_term[t]),
        tol,
    ));
    report.push(Condition::below(
        "sum beta_i = -sqrt(s) kappa_1 cos w",
        data.sup(|t| (beta_sum[t] + root_s * k.k1[t] * w[t].cos()).abs()),
        tol,
    ));
    let (sign, res) = best_sign(data, |e, t| (k.k2[t] - (e * alpha_sum[t] / root_s - w_p[t])).abs());
    report.push(Condition::below("kappa_2 = +-sum alpha_i / sqrt(s) - w'", res, tol));
    report.scalars.insert("sign_kappa_2".into(), sign);
    let e2 = data.apparatus.frame(2).expect("order >= 3");
    let e3 = data.apparatus.frame(3).expect("order >= 3");
    let (sign, res) = best_sign(data, |e, t| {
        let v: DVector<f64> = (&e2[t] * w[t].sin() - &e3[t] * w[t].cos()) * e;
        data.norm(t, &(&data.f_tangent[t] - v))
    });
    report.push(Condition::below("f T = +-(sin w E_2 - cos w E_3)", res, tol));
    report.scalars.insert("sign_f_tangent".into(), sign);
    report.push(Condition::below(
        lambda_name,
        data.sup(|t| (fit.lambda[t] * beta_sum[t] - x[t]).abs()),
        lambda_tol,
    ));
    report.functions.insert("w".into(), w.clone());
}

/// `sum xi_i = sqrt(s)(cos w E_2 + sin w cos phi E_3 + sin w sin phi E_4)`.
fn three_term_system(
    report: &mut TheoremReport,
    data: &CurveData,
    k: &Kappas,
    dec: &XiDecomposition,
    fit: &Fit,
    bundle: Bundle,
    tol: f64,
) {
    let root_s = (data.s as f64).sqrt();
    let len = data.len();
    let (w, phi) = (&dec.w, &dec.phi);
    let beta_sum = data.beta_sum();
    let alpha_sum = data.alpha_sum();
    let loose = 10.0 * tol;
    report.push(Condition::below(
        "sum xi_i in span{E_2, E_3, E_4}",
        data.sup(|t| dec.residual[t]),
        tol,
    ));
    report.push(Condition::below(
        "sum beta_i = -sqrt(s) kappa_1 cos w",
        data.sup(|t| (beta_sum[t] + root_s * k.k1[t] * w[t].cos()).abs()),
        tol,
    ));
    let (a2, a3): (Vec<f64>, Vec<f64>) = match bundle {
        Bundle::Tangent => (
            (0..len)
                .map(|t| k.k1[t] * (k.k1[t].powi(2) + k.k2[t].powi(2)))
                .collect(),
            (0..len).map(|t| -k.k1[t] * k.k2p[t]).collect(),
        ),
        Bundle::Normal => (
            (0..len).map(|t| k.k1[t] * k.k2[t].powi(2) - k.k1pp[t]).collect(),
            (0..len)
                .map(|t| -(2.0 * k.k1p[t] * k.k2[t] + k.k1[t] * k.k2p[t]))
                .collect(),
        ),
    };
    let a2_tol = if bundle == Bundle::Normal { loose } else { tol };
    report.push(Condition::below(
        "lambda sqrt(s) cos w = E_2-coefficient of L",
        data.sup(|t| (fit.lambda[t] * root_s * w[t].cos() - a2[t]).abs()),
        a2_tol,
    ));
    report.push(Condition::below(
        "lambda sqrt(s) sin w cos phi = E_3-coefficient of L",
        data.sup(|t| (fit.lambda[t] * root_s * w[t].sin() * phi[t].cos() - a3[t]).abs()),
        tol,
    ));
    report.push(Condition::below(
        "lambda sqrt(s) sin w sin phi = -kappa_1 kappa_2 kappa_3",
        data.sup(|t| (fit.lambda[t] * root_s * w[t].sin() * phi[t].sin() + k.k1[t] * k.k2[t] * k.k3[t]).abs()),
        tol,
    ));
    let kappa4_name = "kappa_4 sqrt(s) sin w sin phi = -sum alpha_i g(f T, E_5)";
    match data.apparatus.frame(5) {
        Some(e5) => report.push(Condition::below(
            kappa4_name,
            data.sup(|t| {
                (k.k4[t] * root_s * w[t].sin() * phi[t].sin()
                    + alpha_sum[t] * data.inner(t, &data.f_tangent[t], &e5[t]))
                .abs()
            }),
            tol,
        )),
        None => report.push(Condition::not_evaluable(kappa4_name, tol)),
    }
    report.functions.insert("w".into(), w.clone());
    report.functions.insert("phi".into(), phi.clone());
}
