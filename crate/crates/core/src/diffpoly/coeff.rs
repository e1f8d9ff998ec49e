//! Multivariate polynomials with exact rational coefficients over the
//! parameter symbols `x`, `alpha`, `tau_l` and `t_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parameter symbols that may appear in coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// The independent variable. The only symbol with a nonzero derivative.
    X,
    Alpha,
    /// Hierarchy time `tau_l`, `l >= 1`.
    Tau(u8),
    /// Deformation parameter `t_j`, `j >= 0`, of the large-gap formulas.
    T(u8),
}

impl Symbol {
    fn text(self) -> String {
        match self {
            Symbol::X => "x".into(),
            Symbol::Alpha => "alpha".into(),
            Symbol::Tau(l) => format!("tau_{l}"),
            Symbol::T(j) => format!("t_{j}"),
        }
    }

    fn latex(self) -> String {
        match self {
            Symbol::X => "x".into(),
            Symbol::Alpha => "\\alpha".into(),
            Symbol::Tau(l) => format!("\\tau_{l}"),
            Symbol::T(j) => format!("t_{j}"),
        }
    }
}

/// Numeric values for the symbols when a polynomial is evaluated.
#[derive(Clone, Debug, Default)]
pub struct SymbolValues {
    pub x: f64,
    pub alpha: f64,
    /// `tau[l - 1]` holds `tau_l`.
    pub tau: Vec<f64>,
    pub t: Vec<f64>,
}

impl SymbolValues {
    pub fn get(&self, s: Symbol) -> Option<f64> {
        match s {
            Symbol::X => Some(self.x),
            Symbol::Alpha => Some(self.alpha),
            Symbol::Tau(l) => self.tau.get(usize::from(l).checked_sub(1)?).copied(),
            Symbol::T(j) => self.t.get(usize::from(j)).copied(),
        }
    }
}

/// A power product of symbols, stored sorted with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymbolMonomial(Vec<(Symbol, u32)>);

impl SymbolMonomial {
    pub fn one() -> Self {
        SymbolMonomial(Vec::new())
    }

    pub fn var(s: Symbol, power: u32) -> Self {
        if power == 0 {
            Self::one()
        } else {
            SymbolMonomial(vec![(s, power)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.0.iter().find(|(t, _)| *t == s).map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out: BTreeMap<Symbol, u32> = self.0.iter().copied().collect();
        for &(s, e) in &other.0 {
            *out.entry(s).or_insert(0) += e;
        }
        SymbolMonomial(out.into_iter().collect())
    }

    /// Same monomial with the exponent of `s` replaced.
    fn with_power(&self, s: Symbol, power: u32) -> Self {
        let mut out: BTreeMap<Symbol, u32> = self.0.iter().copied().collect();
        if power == 0 {
            out.remove(&s);
        } else {
            out.insert(s, power);
        }
        SymbolMonomial(out.into_iter().collect())
    }

    fn render(&self, latex: bool) -> String {
        let mut s = String::new();
        for &(sym, e) in &self.0 {
            s.push_str(&if latex { sym.latex() } else { sym.text() });
            if e > 1 {
                if latex && e > 9 {
                    s.push_str(&format!("^{{{e}}}"));
                } else {
                    s.push_str(&format!("^{e}"));
                }
            }
        }
        s
    }
}

/// Exact polynomial in the parameter symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CoeffPoly {
    terms: BTreeMap<SymbolMonomial, BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl CoeffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(SymbolMonomial::one(), c);
        p
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn symbol(s: Symbol) -> Self {
        let mut p = Self::zero();
        p.add_term(SymbolMonomial::var(s, 1), BigRational::one());
        p
    }

    pub fn term(m: SymbolMonomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymbolMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of the monomial `1`, i.e. the symbol-free part.
    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&SymbolMonomial::one())
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Returns the rational value if the polynomial is symbol-free.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&SymbolMonomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|m| m.degree_in(s) > 0)
    }

    pub fn add_term(&mut self, m: SymbolMonomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        CoeffPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Partial derivative with respect to a symbol.
    pub fn derivative(&self, s: Symbol) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(s);
            if e > 0 {
                out.add_term(m.with_power(s, e - 1), c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    /// Antiderivative in `s` with zero constant of integration.
    pub fn antiderivative(&self, s: Symbol) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(s) + 1;
            out.add_term(m.with_power(s, e), c / BigRational::from_integer(e.into()));
        }
        out
    }

    /// Replaces symbols by exact rationals; symbols absent from `values`
    /// are kept.
    pub fn substitute(&self, values: &[(Symbol, BigRational)]) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for &(sym, e) in m.factors() {
                match values.iter().find(|(v, _)| *v == sym) {
                    Some((_, val)) => coef *= num_traits::pow(val.clone(), e as usize),
                    None => rest.push((sym, e)),
                }
            }
            out.add_term(SymbolMonomial(rest), coef);
        }
        out
    }

    /// Splits the polynomial by the power of `s`: returns `power -> coefficient`.
    pub fn split_by(&self, s: Symbol) -> BTreeMap<u32, CoeffPoly> {
        let mut out: BTreeMap<u32, CoeffPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.degree_in(s);
            out.entry(e)
                .or_default()
                .add_term(m.with_power(s, 0), c.clone());
        }
        out
    }

    /// Floating-point evaluation; returns `None` if a symbol has no value.
    pub fn eval(&self, values: &SymbolValues) -> Option<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut v = c.to_f64()?;
            for &(s, e) in m.factors() {
                v *= values.get(s)?.powi(e as i32);
            }
            acc += v;
        }
        Some(acc)
    }

    pub fn to_text(&self) -> String {
        self.render(false)
    }

    pub fn to_latex(&self) -> String {
        self.render(true)
    }

    fn render(&self, latex: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let body = m.render(latex);
            if body.is_empty() {
                out.push_str(&fmt_rational(&a, latex));
            } else {
                if !a.is_one() {
                    out.push_str(&fmt_rational(&a, latex));
                }
                out.push_str(&body);
            }
        }
        out
    }
}

pub(crate) fn fmt_rational(r: &BigRational, latex: bool) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if latex {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add for &CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, rhs: &CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, rhs: &CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, rhs: &CoeffPoly) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        CoeffPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Add for CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, rhs: CoeffPoly) -> CoeffPoly {
        &self + &rhs
    }
}

impl Sub for CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, rhs: CoeffPoly) -> CoeffPoly {
        &self - &rhs
    }
}

impl Mul for CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, rhs: CoeffPoly) -> CoeffPoly {
        &self * &rhs
    }
}

impl Neg for CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let x = CoeffPoly::symbol(Symbol::X);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.len(), 0);
    }

    #[test]
    fn derivative_and_antiderivative_in_x() {
        let x = CoeffPoly::symbol(Symbol::X);
        let a = CoeffPoly::symbol(Symbol::Alpha);
        let p = &(&x * &x) * &a;
        let dp = p.derivative(Symbol::X);
        assert_eq!(dp, (&x * &a).scale(&rat(2, 1)));
        assert_eq!(dp.antiderivative(Symbol::X), p);
        assert!(a.derivative(Symbol::X).is_zero());
    }

    #[test]
    fn substitution_and_eval() {
        let t1 = CoeffPoly::symbol(Symbol::T(1));
        let p = &(&t1 * &t1) + &CoeffPoly::from_int(3);
        let s = p.substitute(&[(Symbol::T(1), rat(1, 2))]);
        assert_eq!(s.as_constant(), Some(rat(13, 4)));
        let v = SymbolValues { t: vec![0.0, 2.0], ..Default::default() };
        assert_eq!(p.eval(&v), Some(7.0));
        assert_eq!(p.eval(&SymbolValues::default()), None);
    }

    #[test]
    fn renders_text() {
        let tau = CoeffPoly::symbol(Symbol::Tau(2));
        let p = &tau.scale(&rat(-3, 2)) + &CoeffPoly::from_int(1);
        assert_eq!(p.to_text(), "1 - 3/2tau_2");
    }
}
