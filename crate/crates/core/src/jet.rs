//! Truncated Taylor series ("jets") in one variable.
//!
//! A [`Jet`] of length `K` holds `c_k = f^{(k)}(x0)/k!` for `k < K`. All
//! operations truncate at the common length, so results are exact Taylor
//! coefficients of the composed function up to that order.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet(Vec<f64>);

impl Jet {
    pub fn constant(v: f64, len: usize) -> Self {
        let mut c = vec![0.0; len.max(1)];
        c[0] = v;
        Jet(c)
    }

    /// The identity function `x0 + e`.
    pub fn variable(x0: f64, len: usize) -> Self {
        let mut j = Self::constant(x0, len);
        if len > 1 {
            j.0[1] = 1.0;
        }
        j
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty(), "empty jet");
        Jet(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `f^{(k)}(x0)`, zero beyond the stored length.
    pub fn derivative_value(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0.get(k).map_or(0.0, |c| c * fact)
    }

    /// Derivatives `f, f', ..., f^{(upto)}` at `x0`.
    pub fn derivatives(&self, upto: usize) -> Vec<f64> {
        (0..=upto).map(|k| self.derivative_value(k)).collect()
    }

    /// Taylor jet of `f'`; one order shorter.
    pub fn derivative(&self) -> Jet {
        if self.0.len() == 1 {
            return Jet(vec![0.0]);
        }
        Jet(self.0[1..].iter().enumerate().map(|(k, c)| (k + 1) as f64 * c).collect())
    }

    pub fn truncate(&self, len: usize) -> Jet {
        Jet(self.0[..len.min(self.0.len()).max(1)].to_vec())
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.0[0] += s;
        j
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.len()) / self
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::constant(1.0, self.len());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `f^p` for `f(x0) > 0`, by `f (g)' = p f' g`.
    pub fn powf(&self, p: f64) -> Jet {
        let n = self.len();
        let f = &self.0;
        let mut g = vec![0.0; n];
        g[0] = f[0].powf(p);
        for k in 1..n {
            // k f0 g_k = sum_{j=1}^{k} (p j - (k - j)) f_j g_{k-j}
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (p * j as f64 - (k - j) as f64) * f[j] * g[k - j];
            }
            g[k] = acc / (k as f64 * f[0]);
        }
        Jet(g)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let f = &self.0;
        let mut g = vec![0.0; n];
        g[0] = f[0].exp();
        for k in 1..n {
            let acc: f64 = (1..=k).map(|j| j as f64 * f[j] * g[k - j]).sum();
            g[k] = acc / k as f64;
        }
        Jet(g)
    }

    /// Evaluates the truncated series at offset `h`.
    pub fn eval_at(&self, h: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }
}

fn zip_len(a: &Jet, b: &Jet) -> usize {
    a.len().min(b.len())
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        Jet((0..zip_len(self, rhs)).map(|k| self.0[k] + rhs.0[k]).collect())
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        Jet((0..zip_len(self, rhs)).map(|k| self.0[k] - rhs.0[k]).collect())
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = zip_len(self, rhs);
        Jet((0..n).map(|k| (0..=k).map(|j| self.0[j] * rhs.0[k - j]).sum()).collect())
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        let n = zip_len(self, rhs);
        let mut q = vec![0.0; n];
        for k in 0..n {
            let acc: f64 = (1..=k).map(|j| rhs.0[j] * q[k - j]).sum();
            q[k] = (self.0[k] - acc) / rhs.0[0];
        }
        Jet(q)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { (&self).$m(&rhs) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn elementary_functions() {
        let x = Jet::variable(0.7, 6);
        // exp
        let e = x.exp();
        let want: Vec<f64> = (0..6).map(|_| 0.7f64.exp()).collect();
        assert!(close(&e.derivatives(5), &want, 1e-14));
        // x^{1/3}: derivatives p(p-1)... x^{p-k}
        let c = x.powf(1.0 / 3.0);
        let mut coef = 1.0;
        for k in 0..6 {
            let want = coef * 0.7f64.powf(1.0 / 3.0 - k as f64);
            assert!((c.derivative_value(k) - want).abs() < 1e-12 * want.abs().max(1.0), "k={k}");
            coef *= 1.0 / 3.0 - k as f64;
        }
        // division inverts multiplication
        let y = &x.exp() + &x.powi(3);
        let r = &(&y * &x) / &x;
        assert!(close(r.coeffs(), y.coeffs(), 1e-14));
    }

    #[test]
    fn derivative_and_evaluation() {
        let x = Jet::variable(2.0, 5);
        let p = &x.powi(3) - &x.scale(4.0);
        assert_eq!(p.derivative().value(), 3.0 * 4.0 - 4.0);
        assert!((p.eval_at(0.5) - (2.5f64.powi(3) - 10.0)).abs() < 1e-13);
        assert_eq!(p.derivative().len(), 4);
    }
}
