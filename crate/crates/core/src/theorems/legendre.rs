use nalgebra::DVector;

use super::{Condition, CurveData, TheoremReport};
use crate::error::Result;

pub const THEOREM: &str = "legendre-trajectory-classification";

/// Angle between `u` and `v` in the metric at sample `t`.
pub(super) fn angle(data: &CurveData, t: usize, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (nu, nv) = (data.norm(t, u), data.norm(t, v));
    if nu == 0.0 || nv == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let c = data.inner(t, u, v) / (nu * nv);
    let perp = u / nu - v * (c / nv);
    data.norm(t, &perp).atan2(c)
}

/// `sum_i c_i xi_i` at sample `t`.
fn xi_combination(data: &CurveData, t: usize, c: &[f64]) -> DVector<f64> {
    &data.xi[t] * DVector::from_column_slice(c)
}

/// Checks the classification of Legendre trajectories of strength `q`:
/// `kappa_1 = |q|`, `f T = delta E_2` with `delta = sgn(-q)`, `beta_i = 0`,
/// `kappa_2 = |alpha|`, `E_3` along `delta sum alpha_i xi_i`, the
/// `kappa_3` formula and, when `kappa_3 = 0`, constant `c_i` with unit sum
/// of squares. Tolerance `tol` applies to every condition except the
/// `kappa_3` formula, which is checked at `10 tol`.
pub fn check_legendre_trajectory(data: &CurveData, q: f64, tol: f64) -> Result<TheoremReport> {
    data.validate()?;
    let mut report = TheoremReport::new(THEOREM);
    let r = data.order();
    let rank_tol = data.apparatus.rank_tol;
    let len = data.len();
    report.scalars.insert("q".into(), q);
    report.scalars.insert("order".into(), r as f64);
    report.functions.insert("t".into(), data.apparatus.times.clone());

    let kappa1 = data.kappa(1);
    let legendre = data.legendre_defect();
    let lorentz: Vec<f64> = (0..len)
        .map(|t| {
            let mut v = &data.f_tangent[t] * q;
            if let Some(e2) = data.frame(2, t) {
                v += e2 * kappa1[t];
            }
            data.norm(t, &v)
        })
        .collect();
    let legendre_sup = data.sup(|t| legendre[t]);
    let lorentz_sup = data.sup(|t| lorentz[t]);
    report.push(Condition::below("Legendre: max |eta_i(T)|", legendre_sup, tol));
    report.push(Condition::below(
        "Lorentz equation: |kappa_1 E_2 + q f T|",
        lorentz_sup,
        tol,
    ));
    if legendre_sup >= tol {
        return Ok(report.not_applicable("curve is not Legendre"));
    }
    if lorentz_sup >= tol {
        return Ok(report.not_applicable("curve is not a trajectory of the given strength"));
    }

    report.push(Condition::below(
        "(a) kappa_1 = |q|",
        data.sup(|t| (kappa1[t] - q.abs()).abs()),
        tol,
    ));
    report.functions.insert("kappa_1".into(), kappa1.clone());

    let alpha_norm: Vec<f64> = data.alpha.iter().map(|a| a.norm()).collect();
    if r < 2 {
        report.notes.push("geodesic: q = 0 and the frame is {T}".into());
        report.push(Condition::below(
            "(c) beta_i = 0 along the curve",
            data.sup(|t| data.beta[t].amax()),
            tol,
        ));
        return Ok(report.conclude());
    }

    let delta = if q != 0.0 && data.inf(|t| kappa1[t]) > rank_tol {
        let d = if q < 0.0 { 1.0 } else { -1.0 };
        report.scalars.insert("delta".into(), d);
        Some(d)
    } else {
        None
    };
    match delta {
        Some(d) => report.push(Condition::below(
            "(b) f T = delta E_2",
            data.sup(|t| data.norm(t, &(&data.f_tangent[t] - &data.apparatus.frames[1][t] * d))),
            tol,
        )),
        None => report.push(Condition::not_evaluable("(b) f T = delta E_2", tol)),
    }
    report.push(Condition::below(
        "(c) beta_i = 0 along the curve",
        data.sup(|t| data.beta[t].amax()),
        tol,
    ));
    let kappa2 = data.kappa(2);
    report.push(Condition::below(
        "(d) kappa_2 = sqrt(sum alpha_i^2)",
        data.sup(|t| (kappa2[t] - alpha_norm[t]).abs()),
        tol,
    ));
    report.functions.insert("kappa_2".into(), kappa2);

    if r == 2 {
        report
            .notes
            .push("branch 1: Legendre circle with frame {T, delta f T}".into());
        report.push(Condition::below(
            "alpha_i = 0 (circle branch)",
            data.sup(|t| alpha_norm[t]),
            tol,
        ));
        return Ok(report.conclude());
    }
    report.notes.push(format!("branch 2: osculating order {r}"));

    let d = delta.unwrap_or(1.0);
    let e3 = data.apparatus.frame(3).expect("order >= 3");
    report.push(Condition::below(
        "(e) E_3 along delta sum alpha_i xi_i",
        data.sup(|t| {
            angle(
                data,
                t,
                &e3[t],
                &(xi_combination(data, t, data.alpha[t].as_slice()) * d),
            )
        }),
        tol,
    ));

    // c_i(t) = alpha_i / |alpha| and its derivative
    let s = data.s;
    let c_series: Vec<Vec<f64>> = (0..s)
        .map(|i| (0..len).map(|t| data.alpha[t][i] / alpha_norm[t]).collect())
        .collect();
    let c_prime: Vec<Vec<f64>> = c_series.iter().map(|c| data.derivative(c)).collect();
    let kappa3 = data.kappa(3);
    let kappa3_formula: Vec<f64> = (0..len)
        .map(|t| c_prime.iter().map(|c| c[t] * c[t]).sum::<f64>().sqrt())
        .collect();
    report.push(Condition::below(
        "(f) kappa_3 = |(alpha / |alpha|)'|",
        data.sup(|t| (kappa3[t] - kappa3_formula[t]).abs()),
        10.0 * tol,
    ));
    report.functions.insert("kappa_3".into(), kappa3);
    report.functions.insert("kappa_3_formula".into(), kappa3_formula);

    if r >= 4 {
        let e4 = data.apparatus.frame(4).expect("order >= 4");
        report.push(Condition::below(
            "E_4 along delta sum (alpha_i / |alpha|)' xi_i",
            data.sup(|t| {
                let cp: Vec<f64> = c_prime.iter().map(|c| c[t]).collect();
                angle(data, t, &e4[t], &(xi_combination(data, t, &cp) * d))
            }),
            10.0 * tol,
        ));
        return Ok(report.conclude());
    }

    // r = 3: kappa_3 = 0, constant c_i with sum c_i^2 = 1
    let fitted: Vec<Vec<f64>> = (0..s)
        .map(|i| {
            (0..len)
                .map(|t| d * data.inner(t, &e3[t], &data.xi[t].column(i).into_owned()))
                .collect()
        })
        .collect();
    let spread = fitted.iter().map(|c| data.spread(c)).fold(0.0, f64::max);
    report.push(Condition::below("(g) c_i constant", spread, tol));
    report.push(Condition::below(
        "(g) sum c_i^2 = 1",
        data.sup(|t| (fitted.iter().map(|c| c[t] * c[t]).sum::<f64>() - 1.0).abs()),
        tol,
    ));
    report.push(Condition::below(
        "(g) c_i = alpha_i / |alpha|",
        data.sup(|t| {
            (0..s)
                .map(|i| (fitted[i][t] - c_series[i][t]).abs())
                .fold(0.0, f64::max)
        }),
        tol,
    ));
    for (i, c) in fitted.iter().enumerate() {
        report.scalars.insert(format!("c_{}", i + 1), data.window_mean(c));
    }
    Ok(report.conclude())
}
