use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SpecfunError;

/// Nodes and weights on `(-1, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `sum w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
pub fn legendre_p(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `m` nodes, by Newton's method on `P_m` from
/// Chebyshev-type initial guesses. Nodes are exactly antisymmetric.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule, SpecfunError> {
    if !(2..=2000).contains(&m) {
        return Err(SpecfunError::InvalidOrder { m });
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_p(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th largest node
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Cumulative integrals `I_i = int_{x_0}^{x_i} f` of samples on an
/// increasing grid. Each interval integrates the degree-`degree`
/// interpolant through the nearest `degree + 1` samples; the second value
/// bounds the error by the total change against degree `degree - 2`.
pub fn cumulative_samples(xs: &[f64], fs: &[f64], degree: usize) -> Result<(Vec<f64>, f64), SpecfunError> {
    let n = xs.len();
    if fs.len() != n || degree < 2 || n < degree + 1 {
        return Err(SpecfunError::TooFewSamples { have: n.min(fs.len()), need: degree + 1 });
    }
    if !xs.windows(2).all(|w| w[0] < w[1]) {
        return Err(SpecfunError::UnsortedGrid);
    }
    let mut out = vec![0.0; n];
    let mut err = 0.0;
    for i in 0..n - 1 {
        let hi = local_interval(xs, fs, i, degree);
        let lo = local_interval(xs, fs, i, degree - 2);
        out[i + 1] = out[i] + hi;
        err += (hi - lo).abs();
    }
    Ok((out, err))
}

fn local_interval(xs: &[f64], fs: &[f64], i: usize, degree: usize) -> f64 {
    let n = xs.len();
    let start = (i as isize - (degree as isize - 1) / 2).clamp(0, (n - 1 - degree) as isize) as usize;
    let h = xs[i + 1] - xs[i];
    let y: Vec<f64> = (start..=start + degree).map(|j| (xs[j] - xs[i]) / h).collect();
    // Weights w solve sum_j w_j y_j^r = int_0^1 y^r dy.
    let v = DMatrix::from_fn(degree + 1, degree + 1, |r, j| y[j].powi(r as i32));
    let m = DVector::from_fn(degree + 1, |r, _| 1.0 / (r as f64 + 1.0));
    let w = v.lu().solve(&m).expect("distinct nodes give a nonsingular Vandermonde system");
    h * (0..=degree).map(|j| w[j] * fs[start + j]).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let r = gauss_legendre(2).unwrap();
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = gauss_legendre(3).unwrap();
        assert_eq!(r.nodes[1], 0.0);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn invariants() {
        for &m in &[2, 5, 20, 64, 257, 2000] {
            let r = gauss_legendre(m).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13, "m={m}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for i in 0..m {
                assert_eq!(r.nodes[i], -r.nodes[m - 1 - i]);
                let (p, dp) = legendre_p(m, r.nodes[i]);
                // The residual scales with |P'|, which reaches m^2/2 near the ends.
                assert!((p / dp).abs() < 1e-15, "m={m}");
                if m <= 20 {
                    assert!(p.abs() < 1e-14);
                }
            }
            assert!((r.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_exactness() {
        for &m in &[4usize, 16, 64] {
            let r = gauss_legendre(m).unwrap();
            let d = 2 * m - 2; // even degree up to 2m-2; odd degrees vanish by symmetry
            let exact = 2.0 / (d as f64 + 1.0);
            assert!((r.integrate(|x| x.powi(d as i32)) - exact).abs() < 1e-13);
            assert!(r.integrate(|x| x.powi(2 * m as i32 - 1)).abs() < 1e-13);
        }
        assert!(gauss_legendre(1).is_err());
    }

    #[test]
    fn sample_integration() {
        let xs: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64 + 0.01 * (i as f64).sin()).collect();
        let fs: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let (cum, err) = cumulative_samples(&xs, &fs, 6).unwrap();
        for (x, c) in xs.iter().zip(&cum) {
            let d = c - (x.exp() - xs[0].exp());
            assert!(d.abs() < 5e-9, "{x} {d}");
        }
        assert!(err < 1e-6 && err > 0.0, "{err}");
        let poly: Vec<f64> = xs.iter().map(|x| x.powi(5) - x).collect();
        let (cum, _) = cumulative_samples(&xs, &poly, 6).unwrap();
        let prim = |x: f64| x.powi(6) / 6.0 - x * x / 2.0;
        assert!((cum[40] - (prim(xs[40]) - prim(xs[0]))).abs() < 1e-12);
        assert!(cumulative_samples(&xs[..4], &fs[..4], 6).is_err());
        assert!(cumulative_samples(&[0.0, 2.0, 1.0], &[0.0; 3], 2).is_err());
    }
}
