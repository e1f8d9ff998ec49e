//! Exact differential algebra for the Painlevé II hierarchy.
//!
//! A [`DiffPoly`] is a polynomial in the jet `q, q', q'', ...` of one
//! function with coefficients in [`CoeffPoly`] (exact rationals over the
//! symbols `x`, `alpha`, `tau_l`). The Lenard operators are generated by
//!
//! ```text
//! D L_{j+1} f = (D^3 + 4 f D + 2 f_x) L_j f,   L_0 f = 1/2,   L_j 0 = 0,
//! ```
//!
//! and the `n`-th hierarchy member is
//!
//! ```text
//! G_n = (D + 2q) L_n[q_x - q^2] + sum_{l<n} tau_l (D + 2q) L_l[q_x - q^2] - x q + alpha.
//! ```
//!
//! No floating point is used until [`DiffPoly::eval_jet`] or
//! [`CompiledDiffPoly`].

mod coeff;
mod compiled;
mod poly;
mod print;

use std::sync::RwLock;

use thiserror::Error;

pub use coeff::{rat, CoeffPoly, Symbol, SymbolMonomial, SymbolValues};
pub use compiled::{CompiledDiffPoly, CompiledEquation};
pub use poly::{DiffPoly, JetMonomial};
pub use print::{equation_latex, equation_text};

/// Largest Lenard index served by [`lenard`].
pub const MAX_LENARD: usize = 6;
/// Largest hierarchy member served by [`pii_equation`].
pub const MAX_HIERARCHY_ORDER: usize = 5;
/// Default hierarchy order limit for command-line use.
pub const DEFAULT_HIERARCHY_ORDER: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffPolyError {
    #[error("input is not a total derivative; remainder {remainder}")]
    NotExactDerivative { remainder: String },
    #[error("jet has no entry for derivative order {order}")]
    MissingJetEntry { order: usize },
    #[error("a coefficient symbol has no numeric value")]
    MissingSymbolValue,
    #[error("order {requested} exceeds the configured maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("hierarchy order must be positive")]
    ZeroOrder,
}

static LENARD_CACHE: RwLock<Vec<DiffPoly>> = RwLock::new(Vec::new());
static PII_CACHE: RwLock<Vec<DiffPoly>> = RwLock::new(Vec::new());

/// The Lenard differential polynomial `L_j[f]`, in the jet of `f`.
pub fn lenard(j: usize) -> Result<DiffPoly, DiffPolyError> {
    if j > MAX_LENARD {
        return Err(DiffPolyError::OrderTooHigh { requested: j, max: MAX_LENARD });
    }
    if let Some(p) = LENARD_CACHE.read().expect("lenard cache poisoned").get(j) {
        return Ok(p.clone());
    }
    let mut cache = LENARD_CACHE.write().expect("lenard cache poisoned");
    if cache.is_empty() {
        cache.push(poly::half());
    }
    while cache.len() <= j {
        let prev = cache.last().expect("seeded above");
        let next = lenard_operator(prev).integrate_exact()?;
        cache.push(next);
    }
    Ok(cache[j].clone())
}

/// `(D^3 + 4 f D + 2 f_x) p` with `f` the jet variable of order 0.
pub fn lenard_operator(p: &DiffPoly) -> DiffPoly {
    let f = DiffPoly::var(0);
    let fx = DiffPoly::var(1);
    let dp = p.total_derivative();
    let d3p = dp.total_derivative().total_derivative();
    let four = DiffPoly::int(4);
    let two = DiffPoly::int(2);
    &(&d3p + &(&(&four * &f) * &dp)) + &(&(&two * &fx) * p)
}

/// `q_x - q^2`, the argument of the Lenard operators in the hierarchy.
pub fn miura_argument() -> DiffPoly {
    &DiffPoly::var(1) - &DiffPoly::var(0).pow(2)
}

/// `(D + 2q) L_l[q_x - q^2]`, the building block of the hierarchy.
pub fn hierarchy_block(l: usize) -> Result<DiffPoly, DiffPolyError> {
    let inner = lenard(l)?.substitute(&miura_argument());
    let two_q = &DiffPoly::int(2) * &DiffPoly::var(0);
    Ok(&inner.total_derivative() + &(&two_q * &inner))
}

/// The left-hand side `G_n` of the `n`-th Painlevé II hierarchy equation
/// `G_n = 0`, with symbols `x`, `alpha`, `tau_1..tau_{n-1}`.
pub fn pii_equation(n: usize) -> Result<DiffPoly, DiffPolyError> {
    if n == 0 {
        return Err(DiffPolyError::ZeroOrder);
    }
    if n > MAX_HIERARCHY_ORDER {
        return Err(DiffPolyError::OrderTooHigh { requested: n, max: MAX_HIERARCHY_ORDER });
    }
    if let Some(p) = PII_CACHE.read().expect("hierarchy cache poisoned").get(n - 1) {
        return Ok(p.clone());
    }
    let mut cache = PII_CACHE.write().expect("hierarchy cache poisoned");
    while cache.len() < n {
        let m = cache.len() + 1;
        let mut g = hierarchy_block(m)?;
        for l in 1..m {
            let tau = CoeffPoly::symbol(Symbol::Tau(l as u8));
            g = &g + &hierarchy_block(l)?.scale(&tau);
        }
        let xq = DiffPoly::term(JetMonomial::var(0, 1), CoeffPoly::symbol(Symbol::X));
        g = &(&g - &xq) + &DiffPoly::symbol(Symbol::Alpha);
        cache.push(g);
    }
    Ok(cache[n - 1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(d: usize) -> DiffPoly {
        DiffPoly::var(d)
    }

    fn c(n: i64) -> DiffPoly {
        DiffPoly::int(n)
    }

    #[test]
    fn algebra_basics() {
        let f = q(0);
        assert!((&f + &(-&f)).is_zero());
        assert_eq!(&f * &f, DiffPoly::term(JetMonomial::var(0, 2), CoeffPoly::one()));
    }

    #[test]
    fn derivative_examples() {
        let f = q(0);
        assert_eq!((&f * &f).total_derivative(), &(&c(2) * &f) * &q(1));
        let xq = DiffPoly::term(JetMonomial::var(0, 1), CoeffPoly::symbol(Symbol::X));
        let expected = &q(0) + &DiffPoly::term(JetMonomial::var(1, 1), CoeffPoly::symbol(Symbol::X));
        assert_eq!(xq.total_derivative(), expected);
        // L_2 f = f_xx + 3 f^2 differentiates to f_xxx + 6 f f_x.
        let l2 = &q(2) + &(&c(3) * &(&f * &f));
        assert_eq!(l2.total_derivative(), &q(3) + &(&(&c(6) * &f) * &q(1)));
    }

    #[test]
    fn integrate_examples() {
        let f = q(0);
        let two_f_fx = &(&c(2) * &f) * &q(1);
        assert_eq!(two_f_fx.integrate_exact().unwrap(), &f * &f);
        let rhs = &q(3) + &(&(&c(6) * &f) * &q(1));
        let l2 = &q(2) + &(&c(3) * &(&f * &f));
        assert_eq!(rhs.integrate_exact().unwrap(), l2);
        let fx2 = &q(1) * &q(1);
        assert!(matches!(fx2.integrate_exact(), Err(DiffPolyError::NotExactDerivative { .. })));
        assert!(matches!(f.integrate_exact(), Err(DiffPolyError::NotExactDerivative { .. })));
    }

    #[test]
    fn integrate_handles_explicit_x() {
        // D(x q^2) = q^2 + 2 x q q_x
        let x = DiffPoly::symbol(Symbol::X);
        let p = &x * &(&q(0) * &q(0));
        assert_eq!(p.total_derivative().integrate_exact().unwrap(), p);
        // D(x^2/2) = x
        assert_eq!(x.integrate_exact().unwrap(), (&x * &x).scale_rational(&rat(1, 2)));
    }

    #[test]
    fn lenard_low_orders() {
        assert_eq!(lenard(0).unwrap(), DiffPoly::rational(rat(1, 2)));
        assert_eq!(lenard(1).unwrap(), q(0));
        let f = q(0);
        let l3 = &(&(&q(4) + &(&(&c(10) * &f) * &q(2))) + &(&c(5) * &(&q(1) * &q(1))))
            + &(&c(10) * &f.pow(3));
        assert_eq!(lenard(3).unwrap(), l3);
        assert!(matches!(lenard(MAX_LENARD + 1), Err(DiffPolyError::OrderTooHigh { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let g1 = pii_equation(1).unwrap();
        let jac = g1.jet_jacobian();
        let x = DiffPoly::symbol(Symbol::X);
        assert_eq!(jac.len(), 2);
        assert_eq!(jac[0].0, 0);
        assert_eq!(jac[0].1, &(&c(-6) * &(&q(0) * &q(0))) - &x);
        assert_eq!(jac[1], (2, c(1)));
        let sq = &q(0) * &q(0);
        assert_eq!(sq.jet_jacobian(), vec![(0, &c(2) * &q(0))]);
        let g3 = pii_equation(3).unwrap();
        let top = g3.jet_jacobian().into_iter().find(|(d, _)| *d == 6).unwrap();
        assert_eq!(top.1, c(1));
    }

    #[test]
    fn eval_examples() {
        let g1 = pii_equation(1).unwrap();
        assert_eq!(g1.eval_jet(&[0.0, 0.0, 0.0], 0.0, 0.5, &[]).unwrap(), 0.5);
        assert_eq!(g1.eval_jet(&[1.0, 0.0, 2.0], 1.0, 0.5, &[]).unwrap(), -0.5);
        assert!(matches!(
            g1.eval_jet(&[1.0, 0.0], 1.0, 0.5, &[]),
            Err(DiffPolyError::MissingJetEntry { order: 2 })
        ));
    }

    #[test]
    fn scale_then_add_matches_lenard_two() {
        let f = q(0);
        let p = &q(2).scale_rational(&rat(1, 1)) + &(&f * &f).scale_rational(&rat(3, 1));
        assert_eq!(p, lenard(2).unwrap());
    }

    #[test]
    fn substitute_miura() {
        // L_1[q_x - q^2] = q_x - q^2
        let l1 = lenard(1).unwrap().substitute(&miura_argument());
        assert_eq!(l1, miura_argument());
    }
}
