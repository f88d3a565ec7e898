//! Built-in models: the standard S-space, the flat C-space and the
//! Kenmotsu-type warped product.
//!
//! Coordinates are ordered `(x_1..x_n, y_1..y_n, z_1..z_s)`, i.e. chart
//! coordinates `x1..x(2n+s)` in the expression language.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::model::{ChartDomain, FramedStructure, ManifoldModel};
use crate::model_file::ModelSpec;

pub const STANDARD_HALF_WIDTH: f64 = 100.0;
pub const C_SPACE_HALF_WIDTH: f64 = 50.0;
pub const KENMOTSU_FIBER_HALF_WIDTH: f64 = 20.0;
pub const KENMOTSU_Z_HALF_WIDTH: f64 = 5.0;

fn check_params(n: usize, s: usize) -> Result<()> {
    if n == 0 || s == 0 {
        return Err(Error::Parameter(format!("need n >= 1 and s >= 1, got n={n}, s={s}")));
    }
    Ok(())
}

/// `eta_a = 1/2 (dz_a - sum_i y_i dx_i)`, `xi_a = 2 d/dz_a`,
/// `g = sum_a eta_a (x) eta_a + 1/4 sum_i (dx_i^2 + dy_i^2)`,
/// `f(d/dx_i) = -d/dy_i`, `f(d/dy_i) = d/dx_i + y_i sum_a d/dz_a`.
/// An S-manifold: `alpha_i = 1`, `beta_i = 0`.
#[derive(Debug, Clone, Copy)]
struct StandardS {
    n: usize,
    s: usize,
}

impl StandardS {
    fn eta_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let (n, s) = (self.n, self.s);
        DMatrix::from_fn(s, 2 * n + s, |a, c| {
            if c < n {
                -0.5 * x[n + c]
            } else if c == 2 * n + a {
                0.5
            } else {
                0.0
            }
        })
    }
}

impl FramedStructure for StandardS {
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let eta = self.eta_matrix(x);
        let mut g = eta.transpose() * &eta;
        for i in 0..2 * self.n {
            g[(i, i)] += 0.25;
        }
        Ok(g)
    }

    fn f_tensor(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let (n, s) = (self.n, self.s);
        let mut f = DMatrix::zeros(2 * n + s, 2 * n + s);
        for i in 0..n {
            f[(n + i, i)] = -1.0;
            f[(i, n + i)] = 1.0;
            for a in 0..s {
                f[(2 * n + a, n + i)] = x[n + i];
            }
        }
        Ok(f)
    }

    fn xi(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        let (n, s) = (self.n, self.s);
        Ok(DMatrix::from_fn(
            2 * n + s,
            s,
            |r, a| if r == 2 * n + a { 2.0 } else { 0.0 },
        ))
    }

    fn eta(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.eta_matrix(x))
    }

    fn alpha(&self, _x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::from_element(self.s, 1.0))
    }

    fn beta(&self, _x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.s))
    }
}

pub fn standard_s_space(n: usize, s: usize) -> Result<ManifoldModel> {
    check_params(n, s)?;
    ManifoldModel::new(
        format!("standard-s({n},{s})"),
        n,
        s,
        ChartDomain::cube(2 * n + s, STANDARD_HALF_WIDTH),
        Arc::new(StandardS { n, s }),
    )
}

/// Flat product: Euclidean metric, `f` the complex structure on the
/// `2n`-block, `xi_a = d/dz_a`.
#[derive(Debug, Clone, Copy)]
struct Flat {
    n: usize,
    s: usize,
}

fn complex_structure(n: usize, s: usize) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(2 * n + s, 2 * n + s);
    for i in 0..n {
        f[(n + i, i)] = 1.0;
        f[(i, n + i)] = -1.0;
    }
    f
}

fn vertical_frame(n: usize, s: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n + s, s, |r, a| if r == 2 * n + a { 1.0 } else { 0.0 })
}

impl FramedStructure for Flat {
    fn metric(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(2 * self.n + self.s, 2 * self.n + self.s))
    }

    fn f_tensor(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(complex_structure(self.n, self.s))
    }

    fn xi(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(vertical_frame(self.n, self.s))
    }

    fn eta(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(vertical_frame(self.n, self.s).transpose())
    }

    fn alpha(&self, _x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.s))
    }

    fn beta(&self, _x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.s))
    }
}

pub fn c_space(n: usize, s: usize) -> Result<ManifoldModel> {
    check_params(n, s)?;
    ManifoldModel::new(
        format!("c-space({n},{s})"),
        n,
        s,
        ChartDomain::cube(2 * n + s, C_SPACE_HALF_WIDTH),
        Arc::new(Flat { n, s }),
    )
}

/// `g = dz^2 + exp(2 sigma(z)) (sum dx_i^2 + dy_i^2)`, `xi = d/dz`,
/// `f` the complex structure on the fibres. `alpha = 0`, `beta = sigma'`.
#[derive(Debug, Clone)]
struct Warped {
    n: usize,
    sigma: Expression,
    sigma_prime: Option<Expression>,
}

impl Warped {
    fn z_index(&self) -> usize {
        2 * self.n
    }
}

impl FramedStructure for Warped {
    fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let d = 2 * self.n + 1;
        let w = (2.0 * self.sigma.eval(x)?).exp();
        Ok(DMatrix::from_fn(d, d, |r, c| match (r == c, r == self.z_index()) {
            (true, true) => 1.0,
            (true, false) => w,
            _ => 0.0,
        }))
    }

    fn f_tensor(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(complex_structure(self.n, 1))
    }

    fn xi(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(vertical_frame(self.n, 1))
    }

    fn eta(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(vertical_frame(self.n, 1).transpose())
    }

    fn alpha(&self, _x: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::zeros(1))
    }

    fn beta(&self, x: &[f64]) -> Option<DVector<f64>> {
        let d = self.sigma_prime.as_ref()?.eval(x).ok()?;
        Some(DVector::from_element(1, d))
    }
}

/// Warped product with warping exponent `sigma`, an expression in `z`
/// (the last chart coordinate; `x(2n+1)` works too).
pub fn kenmotsu_warped(n: usize, sigma: &str) -> Result<ManifoldModel> {
    check_params(n, 1)?;
    let z = 2 * n;
    let sigma = Expression::parse_with_aliases(sigma, &[("z", z)])?;
    if sigma.max_variable().is_some_and(|v| v != z) {
        return Err(Error::Parameter("sigma may depend on z only".into()));
    }
    let sigma_prime = sigma.derivative(z);
    let mut lo = vec![-KENMOTSU_FIBER_HALF_WIDTH; 2 * n + 1];
    let mut hi = vec![KENMOTSU_FIBER_HALF_WIDTH; 2 * n + 1];
    lo[z] = -KENMOTSU_Z_HALF_WIDTH;
    hi[z] = KENMOTSU_Z_HALF_WIDTH;
    let name = format!("kenmotsu-warped({n}, sigma={})", sigma.source());
    ManifoldModel::new(
        name,
        n,
        1,
        ChartDomain::new(lo, hi)?,
        Arc::new(Warped { n, sigma, sigma_prime }),
    )
}

/// Resolves a catalog reference: `standard:N:S`, `cspace:N:S` or
/// `kenmotsu:N:SIGMA`.
pub fn from_name(spec: &str) -> Result<ManifoldModel> {
    let mut parts = spec.splitn(3, ':');
    let kind = parts.next().unwrap_or_default();
    let n: usize = parts
        .next()
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parameter(format!("`{spec}`: expected KIND:N:...")))?;
    let rest = parts.next().unwrap_or_default();
    match kind {
        "standard" | "cspace" => {
            let s: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("`{spec}`: bad s")))?;
            if kind == "standard" {
                standard_s_space(n, s)
            } else {
                c_space(n, s)
            }
        }
        "kenmotsu" => kenmotsu_warped(n, if rest.is_empty() { "z" } else { rest }),
        _ => Err(Error::Parameter(format!("unknown catalog model `{kind}`"))),
    }
}

fn literal(v: f64) -> String {
    format!("{v:?}")
}

/// Model-file encoding of `c_space(n, s)`.
pub fn c_space_spec(n: usize, s: usize) -> Result<ModelSpec> {
    check_params(n, s)?;
    let d = 2 * n + s;
    let g = DMatrix::<f64>::identity(d, d);
    let f = complex_structure(n, s);
    let xi = vertical_frame(n, s);
    Ok(ModelSpec {
        name: format!("c-space({n},{s})"),
        n,
        s,
        domain: vec![[-C_SPACE_HALF_WIDTH, C_SPACE_HALF_WIDTH]; d],
        g: (0..d).map(|r| (0..d).map(|c| literal(g[(r, c)])).collect()).collect(),
        f: (0..d).map(|r| (0..d).map(|c| literal(f[(r, c)])).collect()).collect(),
        xi: (0..s).map(|a| (0..d).map(|r| literal(xi[(r, a)])).collect()).collect(),
        eta: (0..s).map(|a| (0..d).map(|r| literal(xi[(r, a)])).collect()).collect(),
        alpha: Some(vec!["0".into(); s]),
        beta: Some(vec!["0".into(); s]),
        sample_points: vec![vec![0.0; d], vec![1.0; d]],
    })
}

/// Model-file encoding of `standard_s_space(n, s)`.
pub fn standard_s_space_spec(n: usize, s: usize) -> Result<ModelSpec> {
    check_params(n, s)?;
    let d = 2 * n + s;
    let y = |i: usize| format!("x{}", n + i + 1);
    let eta: Vec<Vec<String>> = (0..s)
        .map(|a| {
            (0..d)
                .map(|c| {
                    if c < n {
                        format!("-0.5*{}", y(c))
                    } else if c == 2 * n + a {
                        "0.5".into()
                    } else {
                        "0".into()
                    }
                })
                .collect()
        })
        .collect();
    let mut g = vec![vec!["0".to_string(); d]; d];
    for r in 0..d {
        for c in 0..d {
            let mut terms: Vec<String> = (0..s)
                .filter_map(|a| {
                    let (u, v) = (&eta[a][r], &eta[a][c]);
                    (u != "0" && v != "0").then(|| format!("({u})*({v})"))
                })
                .collect();
            if r == c && r < 2 * n {
                terms.push("0.25".into());
            }
            if !terms.is_empty() {
                g[r][c] = terms.join(" + ");
            }
        }
    }
    let mut f = vec![vec!["0".to_string(); d]; d];
    for i in 0..n {
        f[n + i][i] = "-1".into();
        f[i][n + i] = "1".into();
        for a in 0..s {
            f[2 * n + a][n + i] = y(i);
        }
    }
    Ok(ModelSpec {
        name: format!("standard-s({n},{s})"),
        n,
        s,
        domain: vec![[-STANDARD_HALF_WIDTH, STANDARD_HALF_WIDTH]; d],
        g,
        f,
        xi: (0..s)
            .map(|a| {
                (0..d)
                    .map(|r| if r == 2 * n + a { "2".into() } else { "0".into() })
                    .collect()
            })
            .collect(),
        eta,
        alpha: Some(vec!["1".into(); s]),
        beta: Some(vec!["0".into(); s]),
        sample_points: vec![vec![0.0; d], vec![0.5; d]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{check_framed_structure, extract_alpha_beta};

    #[test]
    fn bad_parameters() {
        assert!(matches!(standard_s_space(0, 1), Err(Error::Parameter(_))));
        assert!(matches!(c_space(1, 0), Err(Error::Parameter(_))));
        assert!(kenmotsu_warped(1, "sin(").is_err());
        assert!(kenmotsu_warped(1, "x1").is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(standard_s_space(1, 1).unwrap().dim(), 3);
        assert_eq!(standard_s_space(1, 2).unwrap().dim(), 4);
        assert_eq!(c_space(2, 3).unwrap().dim(), 7);
        assert_eq!(kenmotsu_warped(2, "z").unwrap().dim(), 5);
    }

    #[test]
    fn catalog_names_resolve() {
        assert_eq!(from_name("standard:1:2").unwrap().dim(), 4);
        assert_eq!(from_name("cspace:2:1").unwrap().dim(), 5);
        let k = from_name("kenmotsu:1:z^2/2").unwrap();
        assert_eq!(k.stored_beta(&[0.0, 0.0, 1.5]).unwrap()[0], 1.5);
        assert!(from_name("torus:1:1").is_err());
        assert!(from_name("standard:x:1").is_err());
    }

    #[test]
    fn unwarped_kenmotsu_is_c_space() {
        let k = kenmotsu_warped(1, "0").unwrap();
        let fit = extract_alpha_beta(&k, &[0.3, -0.4, 0.7]).unwrap();
        assert!(fit.alpha[0].abs() < 1e-8 && fit.beta[0].abs() < 1e-8);
        let c = c_space(1, 1).unwrap();
        let p = [0.3, -0.4, 0.7];
        assert_eq!(k.metric(&p).unwrap(), c.metric(&p).unwrap());
    }

    #[test]
    fn standard_spec_certifies() {
        let m = crate::model_file::build_model(&standard_s_space_spec(2, 2).unwrap()).unwrap();
        let pts = vec![vec![0.3, -0.2, 0.5, 1.1, 0.0, 2.0]];
        assert!(check_framed_structure(&m, &pts).unwrap().all_passed());
    }
}
