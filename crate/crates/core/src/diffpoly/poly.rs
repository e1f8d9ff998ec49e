use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::coeff::{CoeffPoly, Symbol, SymbolValues};
use super::DiffPolyError;

/// Power product of jet variables: `exps[d]` is the power of the `d`-th
/// derivative. Trailing zeros are trimmed, so `[]` is the monomial `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct JetMonomial(Vec<u32>);

impl JetMonomial {
    pub fn one() -> Self {
        JetMonomial(Vec::new())
    }

    pub fn from_exps(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        JetMonomial(exps)
    }

    /// `(q^{(d)})^power`.
    pub fn var(d: usize, power: u32) -> Self {
        let mut exps = vec![0; d + 1];
        exps[d] = power;
        Self::from_exps(exps)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn power(&self, d: usize) -> u32 {
        self.0.get(d).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Highest derivative order present, `None` for the monomial `1`.
    pub fn max_order(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Polynomial degree (number of factors).
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Scaling weight with `q^{(d)}` of weight `d + 1`.
    pub fn weight(&self) -> u32 {
        self.0.iter().enumerate().map(|(d, &e)| (d as u32 + 1) * e).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let exps = (0..n).map(|d| self.power(d) + other.power(d)).collect();
        Self::from_exps(exps)
    }

    fn with_power(&self, d: usize, power: u32) -> Self {
        let mut exps = self.0.clone();
        if exps.len() <= d {
            exps.resize(d + 1, 0);
        }
        exps[d] = power;
        Self::from_exps(exps)
    }
}

impl Ord for JetMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for JetMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Differential polynomial in the jet of a single dependent function, with
/// coefficients polynomial in the parameter symbols.
///
/// The representation is canonical: monomials are kept sorted and merged
/// and zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<JetMonomial, CoeffPoly>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: CoeffPoly) -> Self {
        Self::term(JetMonomial::one(), c)
    }

    pub fn rational(c: BigRational) -> Self {
        Self::constant(CoeffPoly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// The jet variable `q^{(d)}`.
    pub fn var(d: usize) -> Self {
        Self::term(JetMonomial::var(d, 1), CoeffPoly::one())
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::constant(CoeffPoly::symbol(s))
    }

    pub fn term(m: JetMonomial, c: CoeffPoly) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &CoeffPoly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &JetMonomial) -> CoeffPoly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: JetMonomial, c: CoeffPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &CoeffPoly) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn scale_rational(&self, c: &BigRational) -> Self {
        self.scale(&CoeffPoly::constant(c.clone()))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::int(1);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Highest derivative order of any jet variable present.
    pub fn max_order(&self) -> Option<usize> {
        self.terms.keys().filter_map(JetMonomial::max_order).max()
    }

    /// The symbol-only part (monomial `1`).
    pub fn constant_term(&self) -> CoeffPoly {
        self.coefficient(&JetMonomial::one())
    }

    /// Total derivative `d/dx`: the chain rule over the jet
    /// (`q^{(d)} -> q^{(d+1)}`) plus `x -> 1` in the coefficients.
    pub fn total_derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let dc = c.derivative(Symbol::X);
            if !dc.is_zero() {
                out.add_term(m.clone(), dc);
            }
            for (d, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let lowered = m.with_power(d, e - 1);
                let raised = lowered.mul(&JetMonomial::var(d + 1, 1));
                out.add_term(raised, c.scale(&BigRational::from_integer(e.into())));
            }
        }
        out
    }

    /// Applies `d/dx` `k` times.
    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.total_derivative())
    }

    /// Exact antiderivative of a total derivative.
    ///
    /// Peels the highest derivative order: if `p = D(P)` has top order `d`,
    /// then `p` is linear in `q^{(d)}` with coefficient `dP/dq^{(d-1)}`,
    /// which is integrated formally in `q^{(d-1)}` and its total derivative
    /// subtracted. At order zero only a polynomial in `x` may remain. The
    /// result carries no constant term.
    pub fn integrate_exact(&self) -> Result<Self, DiffPolyError> {
        let mut rest = self.clone();
        let mut acc = Self::zero();
        while let Some(d) = rest.max_order() {
            if d == 0 {
                return Err(DiffPolyError::NotExactDerivative {
                    remainder: rest.to_text("q"),
                });
            }
            let mut piece = Self::zero();
            for (m, c) in &rest.terms {
                match m.power(d) {
                    0 => {}
                    1 => {
                        let base = m.with_power(d, 0);
                        let r = base.power(d - 1);
                        let lifted = base.with_power(d - 1, r + 1);
                        let k = BigRational::from_integer((r + 1).into());
                        piece.add_term(lifted, c.scale(&k.recip()));
                    }
                    _ => {
                        return Err(DiffPolyError::NotExactDerivative {
                            remainder: rest.to_text("q"),
                        })
                    }
                }
            }
            rest = &rest - &piece.total_derivative();
            debug_assert!(rest.terms.keys().all(|m| m.power(d) == 0));
            acc = &acc + &piece;
        }
        // Only jet-free terms remain; they must be integrated in x.
        let c = rest.constant_term();
        let anti = c.antiderivative(Symbol::X);
        Ok(&acc + &Self::constant(anti))
    }

    /// Replaces `f^{(d)}` by `D^d(g)` for every jet variable.
    pub fn substitute(&self, g: &Self) -> Self {
        let top = self.max_order().unwrap_or(0);
        let derivs: Vec<Self> = std::iter::successors(Some(g.clone()), |p| Some(p.total_derivative()))
            .take(top + 1)
            .collect();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut prod = Self::constant(c.clone());
            for (d, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    prod = &prod * &derivs[d].pow(e);
                }
            }
            out = &out + &prod;
        }
        out
    }

    /// Partial derivatives with respect to every jet variable present.
    pub fn jet_jacobian(&self) -> Vec<(usize, DiffPoly)> {
        let top = match self.max_order() {
            Some(t) => t,
            None => return Vec::new(),
        };
        let mut out = Vec::new();
        for d in 0..=top {
            let mut part = Self::zero();
            for (m, c) in &self.terms {
                let e = m.power(d);
                if e > 0 {
                    part.add_term(
                        m.with_power(d, e - 1),
                        c.scale(&BigRational::from_integer(e.into())),
                    );
                }
            }
            if !part.is_zero() {
                out.push((d, part));
            }
        }
        out
    }

    /// Evaluates at a jet point. `jet[d]` is `q^{(d)}`; `tau[l-1]` is `tau_l`.
    pub fn eval_jet(&self, jet: &[f64], x: f64, alpha: f64, tau: &[f64]) -> Result<f64, DiffPolyError> {
        let values = SymbolValues { x, alpha, tau: tau.to_vec(), t: Vec::new() };
        if let Some(top) = self.max_order() {
            if top >= jet.len() {
                return Err(DiffPolyError::MissingJetEntry { order: top });
            }
        }
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let cv = c.eval(&values).ok_or(DiffPolyError::MissingSymbolValue)?;
            let mut v = cv;
            for (d, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    v *= jet[d].powi(e as i32);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Keeps only the terms whose coefficient satisfies `keep`.
    pub fn filter_coefficients(&self, mut keep: impl FnMut(&CoeffPoly) -> bool) -> Self {
        self.filter_terms(|_, c| keep(c))
    }

    /// Keeps only the terms satisfying `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&JetMonomial, &CoeffPoly) -> bool) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if keep(m, c) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Plain-text rendering with `var` as the function name, e.g. `q_xx - 2q^3`.
    pub fn to_text(&self, var: &str) -> String {
        super::print::render(self, var, false)
    }

    pub fn to_latex(&self, var: &str) -> String {
        super::print::render(self, var, true)
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly::zero() - self.clone()
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: DiffPoly) -> DiffPoly {
        &self + &rhs
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: DiffPoly) -> DiffPoly {
        &self - &rhs
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

/// `1/2` as a `DiffPoly`, the seed of the Lenard recursion.
pub(crate) fn half() -> DiffPoly {
    DiffPoly::rational(BigRational::new(BigInt::one(), BigInt::from(2)))
}
