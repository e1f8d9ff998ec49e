//! `zeta'(-1)` by two independent Euler–Maclaurin schemes.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

const EM_CUTOFF: usize = 12;
const EM_TERMS: usize = 14;

/// Bernoulli numbers `B_0..B_{2 terms}` as exact rationals, then rounded.
fn bernoulli_even(terms: usize) -> Vec<f64> {
    let n = 2 * terms;
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    (0..=terms).map(|k| b[2 * k].to_f64().unwrap_or(f64::NAN)).collect()
}

/// `zeta'(s)` for real `s != 1` by Euler–Maclaurin summation with cutoff
/// `N` and `K` Bernoulli corrections:
///
/// ```text
/// zeta(s) = sum_{n<N} n^{-s} + N^{1-s}/(s-1) + N^{-s}/2
///         + sum_k B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1},
/// ```
///
/// differentiated term by term. Valid for all `s` by analytic continuation.
pub fn zeta_prime_at(s: f64) -> f64 {
    let n = EM_CUTOFF as f64;
    let ln_n = n.ln();
    let mut head = 0.0;
    for m in 2..EM_CUTOFF {
        let mf = m as f64;
        head -= mf.ln() * mf.powf(-s);
    }
    let n1 = n.powf(1.0 - s);
    let integral = -ln_n * n1 / (s - 1.0) - n1 / ((s - 1.0) * (s - 1.0));
    let half = -ln_n * n.powf(-s) / 2.0;
    let bern = bernoulli_even(EM_TERMS);
    let mut corr = 0.0;
    let mut fact = 1.0; // (2k)!
    for k in 1..=EM_TERMS {
        fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        // P(s) = prod_{j=0}^{2k-2} (s+j) and its derivative by the product rule.
        let factors: Vec<f64> = (0..=2 * k - 2).map(|j| s + j as f64).collect();
        let p: f64 = factors.iter().product();
        let dp: f64 = (0..factors.len())
            .map(|i| factors.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product::<f64>())
            .sum();
        let pw = n.powf(-s - (2 * k) as f64 + 1.0);
        corr += bern[k] / fact * (dp - ln_n * p) * pw;
    }
    head + integral + half + corr
}

/// Euler's constant by Euler–Maclaurin on the harmonic numbers.
pub fn euler_gamma() -> f64 {
    let n = EM_CUTOFF as f64;
    let h: f64 = (1..EM_CUTOFF).map(|m| 1.0 / m as f64).sum();
    let bern = bernoulli_even(EM_TERMS);
    let corr: f64 = (1..=EM_TERMS).map(|k| bern[k] / ((2 * k) as f64 * n.powi(2 * k as i32))).sum();
    h - n.ln() + 1.0 / (2.0 * n) + corr
}

/// `zeta'(-1)` through the functional equation:
/// `zeta'(-1) = 1/12 - (gamma + ln 2 pi)/12 + zeta'(2)/(2 pi^2)`.
pub fn zeta_prime_minus_one_functional() -> f64 {
    1.0 / 12.0 - (euler_gamma() + (2.0 * PI).ln()) / 12.0 + zeta_prime_at(2.0) / (2.0 * PI * PI)
}

/// `zeta'(-1) = -0.16542114370045092921...`, computed once by direct
/// Euler–Maclaurin summation at `s = -1`.
pub fn zeta_prime_minus_one() -> f64 {
    static V: OnceLock<f64> = OnceLock::new();
    *V.get_or_init(|| zeta_prime_at(-1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORACLE: f64 = -0.165_421_143_700_450_929_213_919_660_243;

    #[test]
    fn direct_scheme() {
        assert!((zeta_prime_minus_one() - ORACLE).abs() < 1e-14);
    }

    #[test]
    fn schemes_agree() {
        assert!((zeta_prime_minus_one() - zeta_prime_minus_one_functional()).abs() < 1e-13);
    }

    #[test]
    fn auxiliary_constants() {
        assert!((euler_gamma() - 0.577_215_664_901_532_860_6).abs() < 1e-15);
        assert!((zeta_prime_at(2.0) + 0.937_548_254_315_843_753_7).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli_even(3);
        assert_eq!(b[1], 1.0 / 6.0);
        assert_eq!(b[2], -1.0 / 30.0);
        assert_eq!(b[3], 1.0 / 42.0);
    }
}
