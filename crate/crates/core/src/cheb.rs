//! Chebyshev series on an interval and the spectral integration operators
//! used by the collocation solver.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Chebyshev–Lobatto points `t_j = -cos(pi j / n)` on `[-1, 1]`, ascending.
pub fn lobatto_points(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if 2 * j == n {
                0.0
            } else {
                -(PI * j as f64 / n as f64).cos()
            }
        })
        .collect()
}

/// Chebyshev coefficients of the degree-`n` interpolant through values at
/// [`lobatto_points`].
pub fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    let mat = coeff_matrix(n);
    (0..=n).map(|k| (0..=n).map(|j| mat[(k, j)] * values[j]).sum()).collect()
}

fn coeff_matrix(n: usize) -> Arc<DMatrix<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DMatrix<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("cache poisoned").get(&n) {
        return m.clone();
    }
    let nf = n as f64;
    let m = DMatrix::from_fn(n + 1, n + 1, |k, j| {
        // T_k(t_j) = (-1)^k cos(k pi j / n)
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut v = sign * (PI * ((k * j) % (2 * n)) as f64 / nf).cos() * 2.0 / nf;
        if j == 0 || j == n {
            v *= 0.5;
        }
        if k == 0 || k == n {
            v *= 0.5;
        }
        v
    });
    let m = Arc::new(m);
    cache.lock().expect("cache poisoned").insert(n, m.clone());
    m
}

/// Clenshaw evaluation of `sum c_k T_k(t)`.
pub fn clenshaw(c: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// Indefinite integral in `t`, vanishing at `t = -1`; one degree higher.
pub fn integrate_coeffs(a: &[f64]) -> Vec<f64> {
    let l = a.len();
    let get = |k: usize| a.get(k).copied().unwrap_or(0.0);
    let mut b = vec![0.0; l + 1];
    if l > 0 {
        b[1] = get(0) - get(2) / 2.0;
    }
    for k in 2..=l {
        b[k] = (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
    }
    b[0] = -(1..=l).map(|k| if k % 2 == 1 { -b[k] } else { b[k] }).sum::<f64>();
    b
}

/// Derivative in `t`; one degree lower.
pub fn differentiate_coeffs(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * a[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Matrix taking values of `w` at the `n + 1` Lobatto points to the values
/// at the same points of the `p`-fold integral `I^p w` anchored at `t = -1`.
pub fn integration_matrix(n: usize, p: usize) -> Arc<DMatrix<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<DMatrix<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("cache poisoned").get(&(n, p)) {
        return m.clone();
    }
    let c = coeff_matrix(n);
    let t = lobatto_points(n);
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        let mut coeffs: Vec<f64> = c.column(col).iter().copied().collect();
        for _ in 0..p {
            coeffs = integrate_coeffs(&coeffs);
        }
        for (row, &tj) in t.iter().enumerate() {
            m[(row, col)] = clenshaw(&coeffs, tj);
        }
    }
    let m = Arc::new(m);
    cache.lock().expect("cache poisoned").insert((n, p), m.clone());
    m
}

/// A function on `[a, b]` as a Chebyshev series in `t = (2x - a - b)/(b - a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebSeries {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(a: f64, b: f64, coeffs: Vec<f64>) -> Self {
        ChebSeries { a, b, coeffs }
    }

    /// Interpolant through values at the mapped Lobatto points.
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        Self::new(a, b, values_to_coeffs(values))
    }

    /// Interpolant of `f` on `n + 1` mapped Lobatto points.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let xs = mapped_points(a, b, n);
        let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        Self::from_values(a, b, &v)
    }

    pub fn to_t(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_t(x))
    }

    pub fn derivative(&self) -> ChebSeries {
        let s = 2.0 / (self.b - self.a);
        let d = differentiate_coeffs(&self.coeffs).into_iter().map(|c| c * s).collect();
        Self::new(self.a, self.b, d)
    }

    /// `x -> int_a^x f`.
    pub fn cumulative_integral(&self) -> ChebSeries {
        let s = (self.b - self.a) / 2.0;
        let c = integrate_coeffs(&self.coeffs).into_iter().map(|v| v * s).collect();
        Self::new(self.a, self.b, c)
    }

    /// `int_a^b f`.
    pub fn definite_integral(&self) -> f64 {
        self.cumulative_integral().eval(self.b)
    }

    /// Magnitude of the trailing coefficients, a resolution indicator.
    pub fn tail_magnitude(&self, count: usize) -> f64 {
        self.coeffs.iter().rev().take(count).fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// `n + 1` Lobatto points mapped to `[a, b]`.
pub fn mapped_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    lobatto_points(n)
        .into_iter()
        .map(|t| 0.5 * (a + b) + 0.5 * (b - a) * t)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_calculus() {
        let s = ChebSeries::from_fn(-1.0, 3.0, 40, |x| (0.5 * x).sin());
        assert!((s.eval(0.3) - 0.15f64.sin()).abs() < 1e-14);
        assert!((s.derivative().eval(2.0) - 0.5 * 1f64.cos()).abs() < 1e-13);
        let i = s.cumulative_integral();
        // int_{-1}^x sin(u/2) du = 2 (cos(1/2) - cos(x/2))
        let want = |x: f64| 2.0 * (0.5f64.cos() - (0.5 * x).cos());
        assert!((i.eval(2.5) - want(2.5)).abs() < 1e-14);
        assert!(i.eval(-1.0).abs() < 1e-15);
    }

    #[test]
    fn integration_matrix_is_exact_on_polynomials() {
        let n = 12;
        let t = lobatto_points(n);
        let w: Vec<f64> = t.iter().map(|&x| x * x).collect();
        let m = integration_matrix(n, 2);
        for (j, &tj) in t.iter().enumerate() {
            let v: f64 = (0..=n).map(|k| m[(j, k)] * w[k]).sum();
            // double integral of t^2 from -1: (t^4 - 1)/12 - (t + 1)/3 ... computed directly
            let exact = (tj.powi(4) - 1.0) / 12.0 + (tj + 1.0) / 3.0;
            assert!((v - exact).abs() < 1e-14, "{v} {exact}");
        }
    }
}
