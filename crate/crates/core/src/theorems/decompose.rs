use std::f64::consts::PI;

use nalgebra::DVector;

use super::{unwrap, CurveData};
use crate::error::{Error, Result};

/// Polar form of `sum xi_i` in the normal frame:
/// `sum xi_i ~ sqrt(s) rho (cos w E2 + sin w cos phi E3 + sin w sin phi E4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiDecomposition {
    /// `g(sum xi, E_j) / sqrt(s)` for `j = 2, 3, 4` (zero when `E_j` is absent).
    pub components: [Vec<f64>; 3],
    /// In `[0, pi]`.
    pub w: Vec<f64>,
    /// In `(-pi, pi]`.
    pub phi: Vec<f64>,
    /// `atan2(z3, z2)`, unwrapped; the angle of the two-term form
    /// `sum xi_i = sqrt(s) (cos w E2 + sin w E3)`.
    pub w_signed: Vec<f64>,
    /// Norm of the projection divided by `sqrt(s)`.
    pub scale: Vec<f64>,
    /// `|sum xi - proj_{E2,E3,E4} sum xi|_g`.
    pub residual: Vec<f64>,
    /// `|sum xi - proj_{E2,E3} sum xi|_g`.
    pub residual_two_term: Vec<f64>,
}

impl XiDecomposition {
    /// `sqrt(s) rho (cos w E2 + sin w cos phi E3 + sin w sin phi E4)` at sample `t`.
    pub fn reconstruct(&self, data: &CurveData, t: usize) -> DVector<f64> {
        let dim = data.tangent(t).len();
        let root_s = (data.s as f64).sqrt();
        let (w, phi) = (self.w[t], self.phi[t]);
        let coeffs = [w.cos(), w.sin() * phi.cos(), w.sin() * phi.sin()];
        let mut v = DVector::zeros(dim);
        for (k, c) in coeffs.iter().enumerate() {
            if let Some(e) = data.frame(k + 2, t) {
                v += e * (root_s * self.scale[t] * c);
            }
        }
        v
    }
}

pub fn decompose_xi_sum(data: &CurveData) -> Result<XiDecomposition> {
    if data.order() < 2 {
        return Err(Error::Parameter(
            "decomposing sum xi needs osculating order >= 2".into(),
        ));
    }
    let len = data.len();
    let root_s = (data.s as f64).sqrt();
    let mut z: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut residual = vec![0.0; len];
    let mut residual_two_term = vec![0.0; len];
    for t in 0..len {
        let sum = data.xi_sum(t);
        let mut rest = sum.clone();
        for (k, zk) in z.iter_mut().enumerate() {
            if let Some(e) = data.frame(k + 2, t) {
                let c = data.inner(t, &sum, e);
                zk[t] = c / root_s;
                rest -= e * c;
            }
            if k == 1 {
                residual_two_term[t] = data.norm(t, &rest);
            }
        }
        residual[t] = data.norm(t, &rest);
    }
    let w = (0..len).map(|t| z[1][t].hypot(z[2][t]).atan2(z[0][t])).collect();
    let phi = (0..len)
        .map(|t| {
            let p = z[2][t].atan2(z[1][t]);
            if p <= -PI {
                PI
            } else {
                p
            }
        })
        .collect();
    let mut w_signed: Vec<f64> = (0..len).map(|t| z[1][t].atan2(z[0][t])).collect();
    unwrap(&mut w_signed);
    let scale = (0..len)
        .map(|t| (z[0][t] * z[0][t] + z[1][t] * z[1][t] + z[2][t] * z[2][t]).sqrt())
        .collect();
    Ok(XiDecomposition {
        components: z,
        w,
        phi,
        w_signed,
        scale,
        residual,
        residual_two_term,
    })
}
