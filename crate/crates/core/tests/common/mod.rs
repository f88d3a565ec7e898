#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use transs_core::frenet::{stride_for, FrenetApparatus};
use transs_core::theorems::CurveData;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const H: f64 = 1e-3;
pub const SAMPLES: usize = 3001;

fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// Order-2 frame data in a flat 4-dimensional chart (n = 1, s = 2) with
/// `xi_a = e_{2+a}`, `T = e_0` and `E_2 = (xi_1 + xi_2) / sqrt(2)`.
pub struct RankTwo {
    pub kappa1: Vec<f64>,
    pub alpha: Vec<[f64; 2]>,
    pub beta: Vec<[f64; 2]>,
    pub e2: DVector<f64>,
}

impl RankTwo {
    pub fn times() -> Vec<f64> {
        (0..SAMPLES).map(|i| i as f64 * H).collect()
    }

    pub fn build(&self) -> CurveData {
        let dim = 4;
        let len = SAMPLES;
        let stride = stride_for(H, len);
        let xi = DMatrix::from_fn(dim, 2, |r, c| if r == 2 + c { 1.0 } else { 0.0 });
        let t = unit(dim, 0);
        let apparatus = FrenetApparatus {
            order: 2,
            times: Self::times(),
            frames: vec![vec![t.clone(); len], vec![self.e2.clone(); len]],
            curvatures: vec![self.kappa1.clone()],
            trailing_curvature: vec![0.0; len],
            rank_tol: 1e-4,
            stride,
            margin: 4 * stride,
            residual: vec![0.0; len],
            gram_defect: 0.0,
        };
        CurveData {
            s: 2,
            h: H,
            metrics: vec![DMatrix::identity(dim, dim); len],
            xi: vec![xi; len],
            alpha: self.alpha.iter().map(|a| DVector::from_column_slice(a)).collect(),
            beta: self.beta.iter().map(|b| DVector::from_column_slice(b)).collect(),
            // f e_0 = -e_1
            f_tangent: vec![-unit(dim, 1); len],
            apparatus,
        }
    }

    pub fn e2_default() -> DVector<f64> {
        DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]) / 2f64.sqrt()
    }

    /// `beta(t) = -exp(t / 5)` on both components, `kappa_1 = -sqrt(2) beta`.
    /// C-parallel in the normal bundle with `lambda = -beta' = exp(t / 5) / 5`.
    pub fn c_parallel_normal() -> Self {
        let beta: Vec<f64> = Self::times().iter().map(|t| -(t / 5.0).exp()).collect();
        Self {
            kappa1: beta.iter().map(|b| -2f64.sqrt() * b).collect(),
            alpha: vec![[0.3, -0.1]; SAMPLES],
            beta: beta.iter().map(|b| [*b, *b]).collect(),
            e2: Self::e2_default(),
        }
    }

    /// `beta = -1/2`, `alpha = (0.7, -0.7)`, `kappa_1 = sqrt(2)/2`.
    /// C-proper in the tangent bundle with `lambda = -s beta^3 = 1/4`.
    pub fn c_proper_tangent() -> Self {
        Self {
            kappa1: vec![0.5 * 2f64.sqrt(); SAMPLES],
            alpha: vec![[0.7, -0.7]; SAMPLES],
            beta: vec![[-0.5, -0.5]; SAMPLES],
            e2: Self::e2_default(),
        }
    }

    /// `beta(t) = -exp(t / 5)`, `alpha = (0.2, -0.2)`, `kappa_1 = -sqrt(2) beta`.
    /// C-proper in the normal bundle with `lambda = beta''`.
    pub fn c_proper_normal() -> Self {
        let mut d = Self::c_parallel_normal();
        d.alpha = vec![[0.2, -0.2]; SAMPLES];
        d
    }
}
