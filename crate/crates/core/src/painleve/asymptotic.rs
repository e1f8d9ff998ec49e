//! Boundary data and initial guesses from the large-|x| behaviour of the
//! distinguished hierarchy solution.

use crate::diffpoly::{pii_equation, CompiledDiffPoly, DiffPoly, JetMonomial, Symbol};
use crate::jet::Jet;
use crate::specfun::airy_ai_pair;

use super::PainleveError;

/// Which end of the real line an asymptotic formula describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Infinity {
    Plus,
    Minus,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `(n!^2 / (2n)!)^{1/(2n)}`, the coefficient of `|x|^{1/(2n)}` at `-inf`.
pub fn minus_coefficient(n: usize) -> f64 {
    (factorial(n).powi(2) / factorial(2 * n)).powf(1.0 / (2 * n) as f64)
}

/// Leading-term boundary jet `(q, q', ..., q^{(n-1)})` at `x`.
///
/// At `+inf` this is the jet of `alpha/x`; at `-inf` the jet of
/// `(n!^2/(2n)! |x|)^{1/(2n)}`. For the Hastings–McLeod case `n = 1`,
/// `alpha = 0`, the `+inf` jet is `(Ai, Ai')` and the `-inf` value carries
/// the `1/(8x^3)` correction.
pub fn asymptotic_bc(n: usize, alpha: f64, side: Infinity, x: f64) -> Result<Vec<f64>, PainleveError> {
    if x.abs() < 4.0 || !x.is_finite() {
        return Err(PainleveError::DomainTooSmall { x });
    }
    let hm = n == 1 && alpha == 0.0;
    let xj = Jet::variable(x, n);
    let jet = match (side, hm) {
        (Infinity::Plus, true) => {
            let (ai, aip) = airy_ai_pair(x).map_err(|_| PainleveError::DomainTooSmall { x })?;
            return Ok(vec![ai, aip][..n].to_vec());
        }
        (Infinity::Minus, true) => {
            let base = xj.scale(-0.5).sqrt();
            &base * &xj.powi(3).scale(8.0).recip().add_scalar(1.0)
        }
        (Infinity::Plus, false) => xj.recip().scale(alpha),
        (Infinity::Minus, false) => xj.scale(-1.0).powf(1.0 / (2 * n) as f64).scale(minus_coefficient(n)),
    };
    Ok(jet.derivatives(n - 1))
}

/// `G_n` with `alpha` and `tau` fixed, split for the asymptotic recipes.
#[derive(Clone, Debug)]
pub struct HierarchyParts {
    pub n: usize,
    pub alpha: f64,
    /// `G_n` itself.
    pub full: CompiledDiffPoly,
    /// `G_n + x q - alpha`.
    plus_rest: CompiledDiffPoly,
    /// Terms free of derivatives of `q` (the algebraic balance).
    algebraic: CompiledDiffPoly,
    algebraic_dq: CompiledDiffPoly,
    /// Terms containing derivatives.
    differential: CompiledDiffPoly,
    /// Coefficient of `q^e` in the algebraic part, as a polynomial in `x`.
    powers: Vec<CompiledDiffPoly>,
}

impl HierarchyParts {
    pub fn new(n: usize, alpha: f64, tau: &[f64]) -> Result<Self, PainleveError> {
        let g = pii_equation(n)?;
        let compile = |p: &DiffPoly| CompiledDiffPoly::new(p, alpha, tau).map_err(PainleveError::from);
        let xq = DiffPoly::term(JetMonomial::var(0, 1), crate::diffpoly::CoeffPoly::symbol(Symbol::X));
        let plus_rest = &(&g + &xq) - &DiffPoly::symbol(Symbol::Alpha);
        let algebraic = g.filter_terms(|m, _| m.max_order().unwrap_or(0) == 0);
        let differential = &g - &algebraic;
        let algebraic_dq = algebraic
            .jet_jacobian()
            .into_iter()
            .find(|(d, _)| *d == 0)
            .map(|(_, p)| p)
            .unwrap_or_default();
        let degree = algebraic.terms().map(|(m, _)| m.power(0)).max().unwrap_or(0) as usize;
        let mut powers = Vec::with_capacity(degree + 1);
        for e in 0..=degree {
            let part = algebraic.filter_terms(|m, _| m.power(0) as usize == e);
            let coef = DiffPoly::constant(part.coefficient(&JetMonomial::var(0, e as u32)));
            powers.push(compile(&coef)?);
        }
        Ok(HierarchyParts {
            n,
            alpha,
            full: compile(&g)?,
            plus_rest: compile(&plus_rest)?,
            algebraic: compile(&algebraic)?,
            algebraic_dq: compile(&algebraic_dq)?,
            differential: compile(&differential)?,
            powers,
        })
    }

    pub fn order(&self) -> usize {
        2 * self.n
    }

    fn algebraic_at(&self, x: f64, q: f64) -> f64 {
        self.algebraic.eval(x, &[q])
    }

    /// Largest positive root of `B(x, q) + shift = 0`, where `B` is the
    /// algebraic part.
    pub fn largest_positive_root(&self, x: f64, shift: f64) -> Option<f64> {
        let coeffs: Vec<f64> = self.powers.iter().map(|p| p.eval(x, &[0.0])).collect();
        let top = *coeffs.last()?;
        if top == 0.0 {
            return None;
        }
        let mut c = coeffs.clone();
        c[0] += shift;
        let bound = 1.0 + c[..c.len() - 1].iter().map(|v| (v / top).abs()).fold(0.0, f64::max);
        let f = |q: f64| self.algebraic_at(x, q) + shift;
        let steps = 4000;
        let mut hi = bound;
        let mut fhi = f(hi);
        for i in (0..steps).rev() {
            let lo = bound * i as f64 / steps as f64;
            let flo = f(lo);
            if flo == 0.0 && lo > 0.0 {
                return Some(lo);
            }
            if flo.signum() != fhi.signum() && fhi != 0.0 {
                return Some(bisect(&f, lo, hi, flo));
            }
            hi = lo;
            fhi = flo;
        }
        None
    }

    /// Taylor jet about `x.value()` of the root of `B(x, q) + shift = 0`
    /// through `start`, by Newton iteration on jets.
    fn jet_root(&self, x: &Jet, shift: &Jet, start: f64) -> Jet {
        let len = x.len().min(shift.len());
        let x = x.truncate(len);
        let mut q = Jet::constant(start, len);
        let sweeps = 4 + (usize::BITS - len.leading_zeros()) as usize;
        for _ in 0..sweeps {
            let f = &self.algebraic.eval_series(&x, std::slice::from_ref(&q)) + shift;
            let fp = self.algebraic_dq.eval_series(&x, std::slice::from_ref(&q));
            q = &q - &(&f / &fp);
        }
        q
    }

    /// Jet (length `len`) of the largest positive algebraic root at `x0`.
    pub fn balanced_root(&self, x0: f64, len: usize) -> Option<Jet> {
        let r = self.largest_positive_root(x0, 0.0)?;
        let x = Jet::variable(x0, len);
        Some(self.jet_root(&x, &Jet::constant(0.0, len), r))
    }

    fn derivative_tower(&self, q: &Jet) -> Vec<Jet> {
        let mut out = vec![q.clone()];
        for d in 1..=self.order() {
            let next = out[d - 1].derivative();
            out.push(next);
        }
        out
    }

    /// Boundary jet at `x0` from `iterations` rounds of
    /// `B(x, q_new) = -D(q_old)` started at the algebraic root. Returns the
    /// jet `(q, ..., q^{(n-1)})` and the size of the last correction.
    pub fn refined_minus(&self, x0: f64, iterations: usize) -> Result<(Vec<f64>, f64), PainleveError> {
        let len = self.n + self.order() * iterations;
        let x = Jet::variable(x0, len);
        let r0 = self.largest_positive_root(x0, 0.0).ok_or(PainleveError::NoBalancedRoot { x: x0 })?;
        let mut q = self.jet_root(&x, &Jet::constant(0.0, len), r0);
        let mut change = f64::INFINITY;
        for _ in 0..iterations {
            let tower = self.derivative_tower(&q);
            let d = self.differential.eval_series(&x, &tower);
            let start = self
                .largest_positive_root(x0, d.value())
                .ok_or(PainleveError::NoBalancedRoot { x: x0 })?;
            let next = self.jet_root(&x, &d, start);
            change = jet_change(&q, &next, self.n);
            q = next;
        }
        Ok((q.derivatives(self.n - 1), change))
    }

    /// Boundary jet at `x0` from `iterations` rounds of the fixed point
    /// `q <- (H(q) + alpha)/x`, `H = G + xq - alpha`, started at `alpha/x`.
    pub fn refined_plus(&self, x0: f64, iterations: usize) -> (Vec<f64>, f64) {
        let q = self.plus_series(x0, iterations, self.n);
        (q.0.derivatives(self.n - 1), q.1)
    }

    /// Jet of length `keep` at `x0` of the `+inf` fixed-point iterate, with
    /// the size of the last correction.
    pub fn plus_series(&self, x0: f64, iterations: usize, keep: usize) -> (Jet, f64) {
        let len = keep + self.order() * iterations;
        let x = Jet::variable(x0, len);
        let mut q = x.recip().scale(self.alpha);
        let mut change = f64::INFINITY;
        for _ in 0..iterations {
            let tower = self.derivative_tower(&q);
            let h = self.plus_rest.eval_series(&x, &tower).add_scalar(self.alpha);
            let next = &h / &x.truncate(h.len());
            change = jet_change(&q, &next, keep);
            q = next;
        }
        (q.truncate(keep), change)
    }
}

fn jet_change(a: &Jet, b: &Jet, upto: usize) -> f64 {
    (0..upto)
        .map(|k| (a.derivative_value(k) - b.derivative_value(k)).abs())
        .fold(0.0, f64::max)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_examples() {
        let p = asymptotic_bc(1, 0.5, Infinity::Plus, 10.0).unwrap();
        assert!((p[0] - 0.05).abs() < 1e-15);
        let m = asymptotic_bc(1, 0.5, Infinity::Minus, -12.0).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0] - 6f64.sqrt()).abs() < 1e-14);
        let m3 = asymptotic_bc(3, 0.5, Infinity::Minus, -10.0).unwrap();
        assert_eq!(m3.len(), 3);
        let c = minus_coefficient(3);
        assert!((m3[0] - c * 10f64.powf(1.0 / 6.0)).abs() < 1e-14);
        assert!((m3[1] + c / 6.0 * 10f64.powf(-5.0 / 6.0)).abs() < 1e-14);
        assert!(matches!(asymptotic_bc(1, 0.5, Infinity::Plus, 3.0), Err(PainleveError::DomainTooSmall { .. })));
    }

    #[test]
    fn minus_coefficient_values() {
        assert!((minus_coefficient(1) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((minus_coefficient(3) - (1.0f64 / 20.0).powf(1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn algebraic_root_first_member() {
        // -2q^3 - xq + 1/2 = 0
        let h = HierarchyParts::new(1, 0.5, &[]).unwrap();
        for &x in &[-12.0, -1.0, 0.0, 3.0, 20.0] {
            let r = h.largest_positive_root(x, 0.0).unwrap();
            assert!((-2.0 * r.powi(3) - x * r + 0.5).abs() < 1e-12);
            let j = h.balanced_root(x, 4).unwrap();
            // implicit differentiation: q' = -q / (6q^2 + x)
            assert!((j.derivative_value(1) + r / (6.0 * r * r + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn plus_series_matches_known_expansion() {
        // First member, alpha = 1/2: matching powers in x q - 1/2 = q'' - 2q^3
        // gives q = 1/(2x) + 3/(4x^4) + 111/(8x^7) + O(x^-10).
        let h = HierarchyParts::new(1, 0.5, &[]).unwrap();
        let x: f64 = 20.0;
        let (j, change) = h.refined_plus(x, 3);
        let want = 0.5 / x + 0.75 / x.powi(4) + 111.0 / 8.0 / x.powi(7);
        assert!((j[0] - want).abs() < 1e3 / x.powi(10), "{}", j[0] - want);
        assert!(change < 1e-9);
    }

    #[test]
    fn minus_refinement_improves_residual() {
        let h = HierarchyParts::new(3, 0.5, &[0.0, 0.0]).unwrap();
        let x0 = -12.0;
        let (lead, _) = h.refined_minus(x0, 0).unwrap();
        let (refined, change) = h.refined_minus(x0, 3).unwrap();
        assert!(change < 1e-6);
        assert!((lead[0] - refined[0]).abs() > change);
    }
}
