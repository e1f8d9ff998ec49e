//! Exact coefficient families `a_j`, `b_j`, the parameter maps `x(s)` and
//! `tau_j(s)`, the large-gap expansion of `d/ds ln det`, its integrated
//! series, and the constants `chi` and `chi^(k)`.
//!
//! Coefficients are kept as [`LaurentPoly`]s whose coefficients are exact
//! polynomials in the deformation parameters `t_j` ([`Symbol::T`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::{CoeffPoly, Symbol, SymbolValues};
use crate::specfun::{cumulative_samples, gamma_half, zeta_prime_minus_one, HalfInt, SpecfunError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapsError {
    #[error("index {j} out of range 0..={max} for k = {k}")]
    IndexOutOfRange { j: usize, k: usize, max: usize },
    #[error("expected {expected} deformation parameters t_j, got {got}")]
    WrongParameterCount { expected: usize, got: usize },
    #[error("s-grid too coarse: quadrature error estimate {estimate:e} exceeds {tol:e}")]
    GridTooCoarse { estimate: f64, tol: f64 },
    #[error("s-grid does not reach s = {s}")]
    GridTooShort { s: f64 },
    #[error(transparent)]
    Quadrature(#[from] SpecfunError),
}

/// `sum_p c_p v^p` over integer `p`, with `c_p` exact polynomials in the
/// `t_j`. The variable `v` is `|s|` for the `a_j` and for the large-gap
/// series, and `s` for the `b_j` and the parameter maps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentPoly {
    pub terms: BTreeMap<i32, CoeffPoly>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(power: i32, c: CoeffPoly) -> Self {
        let mut p = Self::zero();
        p.add_term(power, c);
        p
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(0, CoeffPoly::constant(c))
    }

    pub fn add_term(&mut self, power: i32, c: CoeffPoly) {
        let slot = self.terms.entry(power).or_insert_with(CoeffPoly::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&power);
        }
    }

    pub fn coefficient(&self, power: i32) -> CoeffPoly {
        self.terms.get(&power).cloned().unwrap_or_else(CoeffPoly::zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero();
        for (&p, v) in &self.terms {
            out.add_term(p, v.scale(c));
        }
        out
    }

    pub fn shift(&self, by: i32) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&p, v)| (p + by, v.clone())).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&p, v) in &other.terms {
            out.add_term(p, v.clone());
        }
        out
    }

    /// Product, dropping powers below `min_power`.
    pub fn mul_truncated(&self, other: &Self, min_power: i32) -> Self {
        let mut out = Self::zero();
        for (&p, a) in &self.terms {
            for (&q, b) in &other.terms {
                if p + q >= min_power {
                    out.add_term(p + q, a * b);
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, i32::MIN)
    }

    pub fn substitute(&self, values: &[(Symbol, BigRational)]) -> Self {
        let mut out = Self::zero();
        for (&p, v) in &self.terms {
            out.add_term(p, v.substitute(values));
        }
        out
    }

    pub fn lowest_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn highest_power(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    /// Numeric value at variable `v` and parameters `t`.
    pub fn eval(&self, v: f64, t: &[f64]) -> f64 {
        let vals = t_values(t);
        self.terms
            .iter()
            .map(|(&p, c)| c.eval(&vals).unwrap_or(f64::NAN) * v.powi(p))
            .sum()
    }
}

fn t_values(t: &[f64]) -> SymbolValues {
    SymbolValues { t: t.to_vec(), ..Default::default() }
}

fn t_symbol(j: usize) -> Symbol {
    Symbol::T(u8::try_from(j).expect("deformation index fits in u8"))
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Gamma(p) / (Gamma(q) Gamma(r))` for half-integer arguments whose
/// `sqrt(pi)` factors cancel.
fn gamma_quotient(p: HalfInt, q: HalfInt, r: HalfInt) -> BigRational {
    let v = &gamma_half(p) / &(&gamma_half(q) * &gamma_half(r));
    v.as_rational().cloned().expect("sqrt(pi) factors cancel")
}

fn check_t(k: usize, t: &[BigRational]) -> Result<(), MapsError> {
    if t.len() != 2 * k {
        return Err(MapsError::WrongParameterCount { expected: 2 * k, got: t.len() });
    }
    Ok(())
}

fn t_substitution(t: &[BigRational]) -> Vec<(Symbol, BigRational)> {
    t.iter().enumerate().map(|(j, v)| (t_symbol(j), v.clone())).collect()
}

/// `a_j` as a polynomial in `|s|^{-1}` with symbolic `t_j`:
/// `a_j = Gamma(j+3/2)^{-1} [Gamma(2k+3/2)/Gamma(2k+2-j)
///   + sum_{m=2}^{2k+1-j} t_{2k+1-m} Gamma(2k+3/2-m)/Gamma(2k+2-j-m) |s|^{-m}]`.
pub fn coeff_a_symbolic(j: usize, k: usize) -> Result<LaurentPoly, MapsError> {
    if j > 2 * k + 1 {
        return Err(MapsError::IndexOutOfRange { j, k, max: 2 * k + 1 });
    }
    let (ji, ki) = (j as i64, k as i64);
    let den = HalfInt::half_odd(ji + 1);
    let lead = gamma_quotient(HalfInt::half_odd(2 * ki + 1), den, HalfInt::integer(2 * ki + 2 - ji));
    let mut out = LaurentPoly::constant(lead);
    for m in 2..=(2 * k + 1 - j) {
        let mi = m as i64;
        let c = gamma_quotient(HalfInt::half_odd(2 * ki + 1 - mi), den, HalfInt::integer(2 * ki + 2 - ji - mi));
        out.add_term(-(m as i32), CoeffPoly::symbol(t_symbol(2 * k + 1 - m)).scale(&c));
    }
    Ok(out)
}

/// `a_j` at rational `t = (t_0, ..., t_{2k-1})`.
pub fn coeff_a(j: usize, k: usize, t: &[BigRational]) -> Result<LaurentPoly, MapsError> {
    check_t(k, t)?;
    Ok(coeff_a_symbolic(j, k)?.substitute(&t_substitution(t)))
}

/// `b_j` as a polynomial in `s` with symbolic `t_j`:
/// `b_j = Gamma(2k+3/2)/(Gamma(j+3/2) Gamma(2k+2-j)) s^{2k+1-j}
///   - sum_{l=j}^{2k-1} (-1)^l t_l Gamma(l+1/2)/(Gamma(j+3/2) Gamma(l-j+1)) s^{l-j}`.
pub fn coeff_b_symbolic(j: usize, k: usize) -> Result<LaurentPoly, MapsError> {
    if j > 2 * k {
        return Err(MapsError::IndexOutOfRange { j, k, max: 2 * k });
    }
    let (ji, ki) = (j as i64, k as i64);
    let den = HalfInt::half_odd(ji + 1);
    let lead = gamma_quotient(HalfInt::half_odd(2 * ki + 1), den, HalfInt::integer(2 * ki + 2 - ji));
    let mut out = LaurentPoly::monomial((2 * k + 1 - j) as i32, CoeffPoly::constant(lead));
    for l in j..2 * k {
        let li = l as i64;
        let mut c = gamma_quotient(HalfInt::half_odd(li), den, HalfInt::integer(li - ji + 1));
        if l % 2 == 0 {
            c = -c;
        }
        out.add_term((l - j) as i32, CoeffPoly::symbol(t_symbol(l)).scale(&c));
    }
    Ok(out)
}

/// `b_j` at rational `t`.
pub fn coeff_b(j: usize, k: usize, t: &[BigRational]) -> Result<LaurentPoly, MapsError> {
    check_t(k, t)?;
    Ok(coeff_b_symbolic(j, k)?.substitute(&t_substitution(t)))
}

/// `rational * 2^{two_exponent} * p(s)`: the exact form of a parameter map.
/// Normalized so that no power of two remains in the coefficients of `p`
/// when `p` is a single monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledPoly {
    pub two_exponent: BigRational,
    pub poly: LaurentPoly,
}

impl ScaledPoly {
    /// Moves the power of two out of a single constant coefficient.
    pub fn new(two_exponent: BigRational, poly: LaurentPoly) -> Self {
        let mut out = ScaledPoly { two_exponent, poly };
        if out.poly.terms.len() == 1 {
            let (&p, c) = out.poly.terms.iter().next().expect("one term");
            if let Some(v) = c.as_constant() {
                let e = two_adic_valuation(&v);
                let scaled = v * pow2(-e);
                out.two_exponent += big(e);
                out.poly = LaurentPoly::monomial(p, CoeffPoly::constant(scaled));
            }
        }
        out
    }

    /// Substitutes `t_i = t[i]` and renormalizes.
    pub fn at_t(&self, t: &[BigRational]) -> Self {
        let z: Vec<(Symbol, BigRational)> = t.iter().enumerate().map(|(i, v)| (Symbol::T(i as u8), v.clone())).collect();
        ScaledPoly::new(self.two_exponent.clone(), self.poly.substitute(&z))
    }

    pub fn eval(&self, s: f64, t: &[f64]) -> f64 {
        2f64.powf(self.two_exponent.to_f64().unwrap_or(f64::NAN)) * self.poly.eval(s, t)
    }
}

fn pow2(e: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::from(2).pow(e.unsigned_abs() as u32));
    if e >= 0 { p } else { p.recip() }
}

fn two_adic_valuation(v: &BigRational) -> i64 {
    if v.is_zero() {
        return 0;
    }
    let tz = |n: &BigInt| n.trailing_zeros().unwrap_or(0) as i64;
    tz(v.numer()) - tz(v.denom())
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact `x(s) = -2^{(4k+1)/(4k+3)} b_0(s)`, symbolic in `t`.
pub fn param_x_exact(k: usize) -> ScaledPoly {
    let ki = k as i64;
    let b0 = coeff_b_symbolic(0, k).expect("j = 0 is always in range");
    ScaledPoly::new(frac(4 * ki + 1, 4 * ki + 3), b0.scale(&big(-1)))
}

/// Exact `tau_j(s) = (2j+1) 2^{(4(k-j)+1)/(4k+3)} b_j(s)`, symbolic in `t`.
pub fn param_tau_exact(j: usize, k: usize) -> Result<ScaledPoly, MapsError> {
    if j == 0 || j > 2 * k {
        return Err(MapsError::IndexOutOfRange { j, k, max: 2 * k });
    }
    let (ji, ki) = (j as i64, k as i64);
    let bj = coeff_b_symbolic(j, k)?;
    Ok(ScaledPoly::new(frac(4 * (ki - ji) + 1, 4 * ki + 3), bj.scale(&big(2 * ji + 1))))
}

fn check_t_f64(k: usize, t: &[f64]) -> Result<(), MapsError> {
    if t.len() != 2 * k {
        return Err(MapsError::WrongParameterCount { expected: 2 * k, got: t.len() });
    }
    Ok(())
}

/// `x(s)` at real `s`, `t`.
pub fn param_x(s: f64, k: usize, t: &[f64]) -> Result<f64, MapsError> {
    check_t_f64(k, t)?;
    Ok(param_x_exact(k).eval(s, t))
}

/// `tau_j(s)` for `1 <= j <= 2k`.
pub fn param_tau(j: usize, s: f64, k: usize, t: &[f64]) -> Result<f64, MapsError> {
    check_t_f64(k, t)?;
    Ok(param_tau_exact(j, k)?.eval(s, t))
}

/// `(tau_1(s), ..., tau_{2k}(s))`.
pub fn param_taus(s: f64, k: usize, t: &[f64]) -> Result<Vec<f64>, MapsError> {
    (1..=2 * k).map(|j| param_tau(j, s, k, t)).collect()
}

/// `F(s) = (1/4) a_0^2 |s|^{4k+2} + 3 a_1 / (16 a_0 |s|)`, the large-gap
/// approximation of `d/ds ln det(I - K_s)`.
pub fn largegap_f(s: f64, k: usize, t: &[f64]) -> Result<f64, MapsError> {
    check_t_f64(k, t)?;
    let sigma = s.abs();
    let a0 = coeff_a_symbolic(0, k)?.eval(sigma, t);
    let a1 = coeff_a_symbolic(1, k)?.eval(sigma, t);
    Ok(0.25 * a0 * a0 * sigma.powi(4 * k as i32 + 2) + 3.0 * a1 / (16.0 * a0 * sigma))
}

/// Expansion of the large-gap `F` in powers of `|s|`, symbolic in `t`,
/// with `1/a_0` expanded down to `|s|^{-(4k+4)}`.
pub fn largegap_f_expansion(k: usize) -> LaurentPoly {
    let a0 = coeff_a_symbolic(0, k).expect("j = 0 in range");
    let a1 = coeff_a_symbolic(1, k).expect("j = 1 in range");
    let min_power = -(4 * k as i32 + 4);
    let c0 = a0.coefficient(0).as_constant().expect("leading a_0 is a number");
    // 1/a_0 = (1/c0) sum_i (-e)^i with a_0 = c0 (1 + e)
    let e = LaurentPoly { terms: a0.terms.iter().filter(|(&p, _)| p < 0).map(|(&p, v)| (p, v.clone())).collect() }
        .scale(&c0.recip());
    let mut inv = LaurentPoly::constant(BigRational::one());
    let mut power = LaurentPoly::constant(BigRational::one());
    let neg_e = e.scale(&big(-1));
    while !power.terms.is_empty() {
        power = power.mul_truncated(&neg_e, min_power);
        inv = inv.add(&power);
    }
    let inv = inv.scale(&c0.recip());
    let lead = a0.mul(&a0).shift(4 * k as i32 + 2).scale(&frac(1, 4));
    let corr = a1.mul_truncated(&inv, min_power).shift(-1).scale(&frac(3, 16));
    lead.add(&corr)
}

/// Asymptotic expansion of `ln det(I - K_s)` as `s -> -inf`:
/// `sum_p c_p |s|^p + c_log ln|s| + chi^(k)`, the constant left symbolic.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticSeries {
    pub k: usize,
    pub powers: LaurentPoly,
    pub log_coeff: CoeffPoly,
}

impl AsymptoticSeries {
    /// Value at `s < 0` and numeric `t`, with the constant slot set to `chi`.
    pub fn eval(&self, s: f64, t: &[f64], chi: f64) -> f64 {
        let sigma = s.abs();
        self.powers.eval(sigma, t) + self.log_coeff.eval(&t_values(t)).unwrap_or(f64::NAN) * sigma.ln() + chi
    }

    /// `d/ds` of the series, as a Laurent polynomial in `|s|` (using
    /// `d/ds = -d/d|s|`); the `ln|s|` term contributes `-c_log |s|^{-1}`.
    pub fn derivative(&self) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (&p, c) in &self.powers.terms {
            if p != 0 {
                out.add_term(p - 1, c.scale(&big(-i64::from(p))));
            }
        }
        out.add_term(-1, -&self.log_coeff);
        out
    }

    fn constant_name(&self) -> String {
        if self.k == 0 { "chi".into() } else { format!("chi^({})", self.k) }
    }

    pub fn to_latex(&self) -> String {
        let mut out = String::new();
        let sym = |p: i32| match p {
            0 => String::new(),
            1 => "|s|".into(),
            p => format!("|s|^{{{p}}}"),
        };
        for (&p, c) in self.powers.terms.iter().rev() {
            push_latex_term(&mut out, c, &sym(p));
        }
        push_latex_term(&mut out, &self.log_coeff, "\\ln|s|");
        let name = if self.k == 0 { "\\chi".to_string() } else { format!("\\chi^{{({})}}", self.k) };
        out.push_str(&format!(" + {name}"));
        out
    }

    /// Rows `term, coefficient`, coefficients exact.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,coefficient\n");
        for (&p, c) in self.powers.terms.iter().rev() {
            let _ = writeln!(out, "|s|^{p},{}", csv_field(&c.to_text()));
        }
        let _ = writeln!(out, "ln|s|,{}", csv_field(&self.log_coeff.to_text()));
        let _ = writeln!(out, "{},symbolic", self.constant_name());
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') { format!("\"{s}\"") } else { s.to_string() }
}

fn push_latex_term(out: &mut String, c: &CoeffPoly, var: &str) {
    if c.is_zero() {
        return;
    }
    let single = c.len() == 1;
    let text = c.to_latex();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) if single => (true, rest.to_string()),
        _ => (false, text),
    };
    let body = if single { body } else { format!("\\left({body}\\right)") };
    let body = if var.is_empty() {
        body
    } else if body == "1" {
        var.to_string()
    } else {
        format!("{body}{var}")
    };
    if out.is_empty() {
        out.push_str(if neg { "-" } else { "" });
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    out.push_str(&body);
}

/// Term-by-term antiderivative of [`largegap_f_expansion`] in `s`,
/// normalized so that `d/ds` of the series is the expansion.
pub fn largegap_lndet_series(k: usize) -> AsymptoticSeries {
    let f = largegap_f_expansion(k);
    let mut powers = LaurentPoly::zero();
    let mut log_coeff = CoeffPoly::zero();
    // d/ds = -d/d|s|, so c |s|^p integrates to -c |s|^{p+1}/(p+1).
    for (&p, c) in &f.terms {
        if p == -1 {
            log_coeff = -c;
        } else {
            powers.add_term(p + 1, c.scale(&frac(-1, i64::from(p) + 1)));
        }
    }
    AsymptoticSeries { k, powers, log_coeff }
}

/// Leading coefficient `-((4k+1)! / (2^{4k+1} (2k)! (2k+1)!))^2 / (4k+3)`.
pub fn leading_lndet_coefficient(k: usize) -> BigRational {
    let fact = |n: usize| (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let c = BigRational::new(fact(4 * k + 1), BigInt::from(2).pow(4 * k as u32 + 1) * fact(2 * k) * fact(2 * k + 1));
    -(&c * &c) / big(4 * k as i64 + 3)
}

/// `chi = ln 2 / 24 + zeta'(-1)`.
pub fn chi_airy() -> f64 {
    std::f64::consts::LN_2 / 24.0 + zeta_prime_minus_one()
}

/// Samples of `F(s) = d/ds ln det` on an increasing grid ending at `s_max`,
/// with `tail = int_{s_max}^inf F = -ln det(s_max)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FSamples {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
    pub tail: f64,
}

/// Result of [`estimate_chi`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiEstimate {
    pub estimate: f64,
    /// Spread of the last three estimates.
    pub uncertainty: f64,
    /// `(s, estimate at s)`, most negative `s` last.
    pub sequence: Vec<(f64, f64)>,
    pub quadrature_error: f64,
}

/// Quadrature error allowed for the sampled integral of `F`.
pub const CHI_QUADRATURE_TOL: f64 = 1e-4;
/// Local interpolation degree for integrating samples of `F`; the large-gap
/// `F` is close to a degree `4k + 2` polynomial, so degree 8 covers k = 1.
pub const SAMPLE_RULE_DEGREE: usize = 8;

/// Estimates the constant of `series` at each of `at` (decreasing `s`):
/// `chi(s) = -int_s^inf F - (series(s) without its constant)`.
pub fn estimate_chi(samples: &FSamples, series: &AsymptoticSeries, t: &[f64], at: &[f64]) -> Result<ChiEstimate, MapsError> {
    let (cum, err) = cumulative_samples(&samples.s, &samples.f, SAMPLE_RULE_DEGREE)?;
    if err > CHI_QUADRATURE_TOL {
        return Err(MapsError::GridTooCoarse { estimate: err, tol: CHI_QUADRATURE_TOL });
    }
    let total = cum.last().copied().unwrap_or(0.0);
    let mut sequence = Vec::with_capacity(at.len());
    for &s in at {
        let i = samples
            .s
            .iter()
            .position(|&v| (v - s).abs() < 1e-9)
            .ok_or(MapsError::GridTooShort { s })?;
        let lndet = -(total - cum[i]) - samples.tail;
        sequence.push((s, lndet - series.eval(s, t, 0.0)));
    }
    let last: Vec<f64> = sequence.iter().rev().take(3).map(|p| p.1).collect();
    let spread = last.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - last.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(ChiEstimate {
        estimate: sequence.last().map_or(f64::NAN, |p| p.1),
        uncertainty: if last.len() > 1 { spread } else { f64::INFINITY },
        sequence,
        quadrature_error: err,
    })
}

/// `chi^(1)` at `t = 0` from samples reaching `s <= -6`, evaluated at
/// `s = -4, -5, -6`.
pub fn estimate_chi1(samples: &FSamples) -> Result<ChiEstimate, MapsError> {
    estimate_chi(samples, &largegap_lndet_series(1), &[0.0, 0.0], &[-4.0, -5.0, -6.0])
}
