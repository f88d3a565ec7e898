mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use transs_core::catalog::{c_space, kenmotsu_warped, standard_s_space};
use transs_core::geometry::{
    check_d_omega, check_framed_structure, check_normality, check_xi_derivative, christoffel, extract_alpha_beta,
    fundamental_two_form, metric_compatibility_defect, trans_s_defect,
};
use transs_core::{FramedStructure, ManifoldModel, Result};

/// Closed-form metric of the standard S-space (1,1) and its partials,
/// coordinates (x, y, z).
fn s11_metric(p: &[f64]) -> DMatrix<f64> {
    let y = p[1];
    DMatrix::from_row_slice(
        3,
        3,
        &[(y * y + 1.0) / 4.0, 0.0, -y / 4.0, 0.0, 0.25, 0.0, -y / 4.0, 0.0, 0.25],
    )
}

fn s11_metric_partials(p: &[f64]) -> [DMatrix<f64>; 3] {
    let y = p[1];
    let dy = DMatrix::from_row_slice(3, 3, &[y / 2.0, 0.0, -0.25, 0.0, 0.0, 0.0, -0.25, 0.0, 0.0]);
    [DMatrix::zeros(3, 3), dy, DMatrix::zeros(3, 3)]
}

#[test]
fn christoffel_matches_closed_form_oracle() {
    for p in [[0.0, 0.0, 0.0], [1.3, -2.0, 0.5], [-4.0, 3.5, 7.0]] {
        let m = standard_s_space(1, 1).unwrap();
        let gamma = christoffel(&m, &p).unwrap();
        let ginv = s11_metric(&p).try_inverse().unwrap();
        let dg = s11_metric_partials(&p);
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut expected = 0.0;
                    for l in 0..3 {
                        expected += 0.5 * ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    assert!((gamma.get(k, i, j) - expected).abs() < 1e-8, "{p:?} {k}{i}{j}");
                }
            }
        }
    }
}

fn catalog() -> Vec<ManifoldModel> {
    vec![
        standard_s_space(1, 2).unwrap(),
        c_space(2, 1).unwrap(),
        kenmotsu_warped(1, "z").unwrap(),
    ]
}

fn points(model: &ManifoldModel, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = common::rng(seed);
    (0..count).map(|_| model.domain.sample(&mut rng, 0.5)).collect()
}

#[test]
fn catalog_models_certify_at_random_points() {
    for m in catalog() {
        let report = check_framed_structure(&m, &points(&m, 100, 1)).unwrap();
        assert!(report.all_passed(), "{}", report.table());
        for a in &report.axioms {
            assert!(a.residual < 1e-8, "{} {}", m.name, a.axiom);
        }
    }
}

/// Wraps a model, scaling `f` and shifting the stored `alpha`.
struct Distorted {
    inner: Arc<dyn FramedStructure>,
    f_scale: f64,
    alpha_shift: f64,
    f_noise: Option<DMatrix<f64>>,
}

impl FramedStructure for Distorted {
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.inner.metric(x)
    }
    fn f_tensor(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut f = self.inner.f_tensor(x)? * self.f_scale;
        if let Some(noise) = &self.f_noise {
            // position-dependent perturbation
            f += noise * (1.0 + x.iter().sum::<f64>().sin());
        }
        Ok(f)
    }
    fn xi(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.inner.xi(x)
    }
    fn eta(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.inner.eta(x)
    }
    fn alpha(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.inner.alpha(x).map(|a| a.add_scalar(self.alpha_shift))
    }
    fn beta(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.inner.beta(x)
    }
}

fn distorted(m: &ManifoldModel, f_scale: f64, alpha_shift: f64, f_noise: Option<DMatrix<f64>>) -> ManifoldModel {
    m.with_fields(Arc::new(Distorted {
        inner: m.fields().clone(),
        f_scale,
        alpha_shift,
        f_noise,
    }))
}

#[test]
fn scaled_f_fails_the_square_axiom() {
    let m = standard_s_space(1, 1).unwrap();
    let bad = distorted(&m, 1.1, 0.0, None);
    let report = check_framed_structure(&bad, &points(&m, 10, 2)).unwrap();
    assert!(report.residual("f^2 = -I + sum eta_i (x) xi_i").unwrap() > 0.1);
}

#[test]
fn alpha_recovery_on_catalog() {
    let mut rng = common::rng(3);
    let s12 = standard_s_space(1, 2).unwrap();
    let p = s12.domain.sample(&mut rng, 0.5);
    let fit = extract_alpha_beta(&s12, &p).unwrap();
    assert!((fit.alpha.add_scalar(-1.0)).amax() < 1e-6 && fit.beta.amax() < 1e-6);
    assert!(fit.residual < 1e-6);

    let c = c_space(2, 3).unwrap();
    let fit = extract_alpha_beta(&c, &c.domain.sample(&mut rng, 0.5)).unwrap();
    assert!(fit.alpha.amax() < 1e-10 && fit.beta.amax() < 1e-10 && fit.residual < 1e-10);

    let k = kenmotsu_warped(1, "z^2/2").unwrap();
    for _ in 0..20 {
        let p = k.domain.sample(&mut rng, 0.5);
        let fit = extract_alpha_beta(&k, &p).unwrap();
        assert!(fit.alpha[0].abs() < 1e-6);
        assert!((fit.beta[0] - p[2]).abs() < 1e-6, "{p:?} {}", fit.beta[0]);
    }
}

#[test]
fn xi_derivative_checks() {
    let p = [0.4, -1.2, 0.7, 2.0];
    let s = standard_s_space(1, 2).unwrap();
    assert!(check_xi_derivative(&s, &p).unwrap() < 1e-8);
    assert!(check_xi_derivative(&c_space(1, 2).unwrap(), &p).unwrap() < 1e-10);

    // the defect is linear in alpha: 0.1 |f X|_g for the worst coordinate X
    let shifted = distorted(&s, 1.0, 0.1, None);
    let frame = s.frame_at(&p).unwrap();
    let worst_fx = (0..4)
        .map(|k| frame.norm(&frame.f.column(k).into_owned()))
        .fold(0.0, f64::max);
    let r = check_xi_derivative(&shifted, &p).unwrap();
    assert!((r - 0.1 * worst_fx).abs() < 0.1 * 0.1 * worst_fx, "{r} {worst_fx}");
}

#[test]
fn d_omega_and_normality() {
    let p = [0.4, -1.2, 0.7];
    assert!(check_d_omega(&standard_s_space(1, 1).unwrap(), &p).unwrap() < 1e-6);
    assert!(check_d_omega(&kenmotsu_warped(1, "z").unwrap(), &p).unwrap() < 1e-5);
    assert!(check_d_omega(&c_space(1, 1).unwrap(), &p).unwrap() < 1e-12);

    let c = check_normality(&c_space(1, 1).unwrap(), &p).unwrap();
    assert!(c.identity < 1e-8 && c.s_structure < 1e-8);
    let s = check_normality(&standard_s_space(1, 1).unwrap(), &p).unwrap();
    assert!(s.identity < 1e-6);

    let mut rng = common::rng(4);
    let noise = DMatrix::from_fn(3, 3, |_, _| 0.05 * rand::Rng::gen_range(&mut rng, -1.0..1.0));
    let perturbed = distorted(&standard_s_space(1, 1).unwrap(), 1.0, 0.0, Some(noise));
    assert!(check_normality(&perturbed, &p).unwrap().identity > 1e-3);
}

#[test]
fn two_form_is_the_g_f_product() {
    let m = standard_s_space(2, 1).unwrap();
    let p = [0.3, 0.1, -0.7, 2.0, 1.0];
    let gf = m.metric(&p).unwrap() * m.f_tensor(&p).unwrap();
    for a in 0..5 {
        for b in 0..5 {
            let (ea, eb) = (
                DVector::from_fn(5, |i, _| (i == a) as u8 as f64),
                DVector::from_fn(5, |i, _| (i == b) as u8 as f64),
            );
            assert!((fundamental_two_form(&m, &p, &ea, &eb).unwrap() - gf[(a, b)]).abs() < 1e-15);
        }
    }
}

fn coordinate_point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn christoffel_is_symmetric(p in coordinate_point(4)) {
        for m in [standard_s_space(1, 2).unwrap(), kenmotsu_warped(1, "z^2/2").unwrap()] {
            let x = &p[..m.dim()];
            let gamma = christoffel(&m, x).unwrap();
            for k in 0..m.dim() { for i in 0..m.dim() { for j in 0..m.dim() {
                prop_assert_eq!(gamma.get(k, i, j), gamma.get(k, j, i));
            }}}
        }
    }

    #[test]
    fn metric_compatibility(p in coordinate_point(5), u in coordinate_point(5), v in coordinate_point(5)) {
        for m in catalog() {
            let d = m.dim();
            let x = &p[..d];
            let (u, v) = (DVector::from_column_slice(&u[..d]), DVector::from_column_slice(&v[..d]));
            prop_assert!(metric_compatibility_defect(&m, x, &u, &v).unwrap() < 1e-6);
        }
    }

    #[test]
    fn two_form_is_antisymmetric(p in coordinate_point(4), u in coordinate_point(4), v in coordinate_point(4)) {
        let m = standard_s_space(1, 2).unwrap();
        let (u, v) = (DVector::from_column_slice(&u), DVector::from_column_slice(&v));
        let a = fundamental_two_form(&m, &p, &u, &v).unwrap();
        let b = fundamental_two_form(&m, &p, &v, &u).unwrap();
        prop_assert!((a + b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn fitted_coefficients_reproduce_their_residual(p in coordinate_point(5)) {
        for m in catalog() {
            let x = &p[..m.dim()];
            let fit = extract_alpha_beta(&m, x).unwrap();
            let r = trans_s_defect(&m, x, &fit.alpha, &fit.beta).unwrap();
            prop_assert!((r - fit.residual).abs() < 1e-12);
        }
    }
}
