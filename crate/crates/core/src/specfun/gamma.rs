//! Exact Gamma values at positive integers and half-integers.

use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A positive integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn integer(n: i64) -> Self {
        HalfInt(2 * n)
    }

    /// `n + 1/2`.
    pub fn half_odd(n: i64) -> Self {
        HalfInt(2 * n + 1)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    fn as_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(2))
    }
}

/// `coef * sqrt(pi)^sqrt_pi_power` with an exact rational coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SqrtPiRational {
    pub coef: BigRational,
    pub sqrt_pi_power: i32,
}

impl SqrtPiRational {
    pub fn rational(coef: BigRational) -> Self {
        SqrtPiRational { coef, sqrt_pi_power: 0 }
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    /// The coefficient when no `sqrt(pi)` factor is present.
    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.sqrt_pi_power == 0).then_some(&self.coef)
    }

    pub fn recip(&self) -> Self {
        SqrtPiRational { coef: self.coef.recip(), sqrt_pi_power: -self.sqrt_pi_power }
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coef.to_f64().unwrap_or(f64::NAN);
        c * std::f64::consts::PI.sqrt().powi(self.sqrt_pi_power)
    }
}

impl Mul for &SqrtPiRational {
    type Output = SqrtPiRational;
    fn mul(self, rhs: Self) -> SqrtPiRational {
        SqrtPiRational {
            coef: &self.coef * &rhs.coef,
            sqrt_pi_power: self.sqrt_pi_power + rhs.sqrt_pi_power,
        }
    }
}

impl Div for &SqrtPiRational {
    type Output = SqrtPiRational;
    fn div(self, rhs: Self) -> SqrtPiRational {
        self * &rhs.recip()
    }
}

impl fmt::Display for SqrtPiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sqrt_pi_power {
            0 => write!(f, "{}", self.coef),
            1 => write!(f, "{} sqrt(pi)", self.coef),
            p => write!(f, "{} pi^({p}/2)", self.coef),
        }
    }
}

/// `Gamma(p)` for a positive integer or half-integer `p`.
///
/// # Panics
/// If `p <= 0`.
pub fn gamma_half(p: HalfInt) -> SqrtPiRational {
    assert!(p.0 > 0, "Gamma argument must be positive");
    // Gamma(1) = 1 and Gamma(1/2) = sqrt(pi); climb by rising factorial.
    let (base, mut value) = if p.is_integer() {
        (HalfInt::integer(1), SqrtPiRational::one())
    } else {
        (HalfInt::half_odd(0), SqrtPiRational { coef: BigRational::one(), sqrt_pi_power: 1 })
    };
    value.coef *= rising(base, p);
    value
}

/// `a (a+1) ... (b-1)` for `b - a` a nonnegative integer.
fn rising(a: HalfInt, b: HalfInt) -> BigRational {
    let mut acc = BigRational::one();
    let mut cur = a.as_rational();
    let one = BigRational::one();
    let mut steps = (b.0 - a.0) / 2;
    while steps > 0 {
        acc *= &cur;
        cur += &one;
        steps -= 1;
    }
    acc
}

/// `Gamma(p) / Gamma(q)`; a pure rational when `p - q` is an integer,
/// otherwise a rational times `sqrt(pi)^{+-1}`.
///
/// # Panics
/// If either argument is not positive.
pub fn gamma_half_ratio(p: HalfInt, q: HalfInt) -> SqrtPiRational {
    assert!(p.0 > 0 && q.0 > 0, "Gamma arguments must be positive");
    if (p.0 - q.0) % 2 == 0 {
        let coef = if p >= q { rising(q, p) } else { rising(p, q).recip() };
        debug_assert!(!coef.is_zero());
        SqrtPiRational::rational(coef)
    } else {
        &gamma_half(p) / &gamma_half(q)
    }
}
