//! Nyström evaluation of `ln det(I - K_s)` for the Airy kernel on
//! `L^2(s, inf)`: Gauss–Legendre on `(-1, 1)` mapped by
//! `u = s + L (1 + t)/(1 - t)`, then a Cholesky factorization.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::{airy_ai_unchecked, gauss_legendre};

/// Most negative `s` for which double precision is documented to hold.
pub const S_MIN: f64 = -12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FredholmError {
    #[error("Nyström matrix is not positive definite at s = {s} (m too small or s too negative)")]
    FactorizationFailed { s: f64 },
    #[error("s = {s} is below the validated range s >= {S_MIN}")]
    OutOfRange { s: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// A symmetric kernel with a dedicated diagonal.
pub trait KernelHandle: Sync {
    fn eval(&self, u: f64, v: f64) -> f64;
    fn diagonal(&self, u: f64) -> f64;

    /// `K(x_i, x_j)` for all pairs.
    fn matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), xs.len(), |i, j| {
            if i == j { self.diagonal(xs[i]) } else { self.eval(xs[i], xs[j]) }
        })
    }
}

/// `K(u, v) = (Ai(u) Ai'(v) - Ai(v) Ai'(u)) / (u - v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AiryKernel;

pub fn airy_kernel() -> AiryKernel {
    AiryKernel
}

/// Below this separation the quotient form loses accuracy.
const NEAR_DIAGONAL: f64 = 1e-6;

impl AiryKernel {
    fn from_values(u: f64, (au, du): (f64, f64), v: f64, (av, dv): (f64, f64)) -> f64 {
        if (u - v).abs() >= NEAR_DIAGONAL {
            return (au * dv - av * du) / (u - v);
        }
        // Taylor expansion about the midpoint m with half-gap d:
        // K = K(m, m) + d^2 (A A'/3 + 2 m A'^2/3 - 2 m^2 A^2/3) + O(d^4)
        let m = 0.5 * (u + v);
        let d = 0.5 * (u - v);
        let (a, ap) = airy_ai_unchecked(m);
        let k0 = ap * ap - m * a * a;
        k0 + d * d * (a * ap / 3.0 + 2.0 * m * ap * ap / 3.0 - 2.0 * m * m * a * a / 3.0)
    }
}

impl KernelHandle for AiryKernel {
    fn eval(&self, u: f64, v: f64) -> f64 {
        Self::from_values(u, airy_ai_unchecked(u), v, airy_ai_unchecked(v))
    }

    /// `Ai'(u)^2 - u Ai(u)^2`.
    fn diagonal(&self, u: f64) -> f64 {
        let (a, ap) = airy_ai_unchecked(u);
        ap * ap - u * a * a
    }

    fn matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        let vals: Vec<(f64, f64)> = xs.iter().map(|&x| airy_ai_unchecked(x)).collect();
        DMatrix::from_fn(xs.len(), xs.len(), |i, j| {
            if i == j {
                let (a, ap) = vals[i];
                ap * ap - xs[i] * a * a
            } else {
                Self::from_values(xs[i], vals[i], xs[j], vals[j])
            }
        })
    }
}

/// Quadrature order `m` and mapping scale `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NystromConfig {
    pub m: usize,
    pub l: f64,
}

impl Default for NystromConfig {
    fn default() -> Self {
        NystromConfig { m: 120, l: 4.0 }
    }
}

impl NystromConfig {
    pub fn validate(&self) -> Result<(), FredholmError> {
        if self.m < 20 || self.m > 2000 {
            return Err(FredholmError::InvalidConfig(format!("m = {} outside 20..=2000", self.m)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(FredholmError::InvalidConfig(format!("L = {} must be positive", self.l)));
        }
        Ok(())
    }
}

/// `ln det(I - K_s)` on `L^2(s, inf)`.
pub fn nystrom_lndet(kernel: &impl KernelHandle, s: f64, cfg: &NystromConfig) -> Result<f64, FredholmError> {
    cfg.validate()?;
    if !(s >= S_MIN) {
        return Err(FredholmError::OutOfRange { s });
    }
    let rule = gauss_legendre(cfg.m).map_err(|e| FredholmError::InvalidConfig(e.to_string()))?;
    let (points, sqrt_w): (Vec<f64>, Vec<f64>) = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| (s + cfg.l * (1.0 + t) / (1.0 - t), (w * 2.0 * cfg.l / ((1.0 - t) * (1.0 - t))).sqrt()))
        .unzip();
    let mut a = kernel.matrix(&points);
    for j in 0..cfg.m {
        for i in 0..cfg.m {
            let v = -sqrt_w[i] * a[(i, j)] * sqrt_w[j];
            a[(i, j)] = if i == j { 1.0 + v } else { v };
        }
    }
    let chol = a.cholesky().ok_or(FredholmError::FactorizationFailed { s })?;
    let l = chol.l_dirty();
    Ok(2.0 * (0..cfg.m).map(|i| l[(i, i)].ln()).sum::<f64>())
}

/// One row of [`tw_table_k0`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwRow {
    pub s: f64,
    pub lndet: f64,
    pub det: f64,
}

/// `ln det` and `det` of the Airy kernel on a grid, evaluated in parallel;
/// each entry is independent of the thread count.
pub fn tw_table_k0(s_grid: &[f64], cfg: &NystromConfig) -> Result<Vec<TwRow>, FredholmError> {
    let k = airy_kernel();
    s_grid
        .par_iter()
        .map(|&s| nystrom_lndet(&k, s, cfg).map(|lndet| TwRow { s, lndet, det: lndet.exp() }))
        .collect()
}

/// CSV with columns `s, lndet, det`.
pub fn table_to_csv(rows: &[TwRow]) -> String {
    let mut out = String::from("s,lndet,det\n");
    for r in rows {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", r.s, r.lndet, r.det));
    }
    out
}
