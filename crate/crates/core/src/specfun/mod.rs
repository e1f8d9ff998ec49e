//! Special functions and quadrature primitives, implemented without any
//! external special-function dependency.

mod airy;
mod gamma;
mod quad;
mod zeta;

use thiserror::Error;

pub use airy::{airy_ai, airy_ai_pair, airy_ai_prime, airy_ai_unchecked, airy_bi_series, AIRY_RANGE};
pub use gamma::{gamma_half, gamma_half_ratio, HalfInt, SqrtPiRational};
pub use quad::{cumulative_samples, gauss_legendre, legendre_p, QuadratureRule};
pub use zeta::{euler_gamma, zeta_prime_at, zeta_prime_minus_one, zeta_prime_minus_one_functional};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("argument {x} is outside the validated range [{lo}, {hi}]")]
    OutOfValidatedRange { x: f64, lo: f64, hi: f64 },
    #[error("quadrature order {m} outside 2..=2000")]
    InvalidOrder { m: usize },
    #[error("{have} samples given, at least {need} needed")]
    TooFewSamples { have: usize, need: usize },
    #[error("sample grid is not strictly increasing")]
    UnsortedGrid,
}
