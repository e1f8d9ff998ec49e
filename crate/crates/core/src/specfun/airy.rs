//! Airy function `Ai` and its derivative.
//!
//! Three regimes, each accurate to a few ulps of `max(1, |Ai|)`:
//!
//! * `|x| <= 2`: Maclaurin series of the two standard solutions;
//! * `-16 <= x <= 12`: Taylor expansion about the nearest anchor of a grid
//!   with spacing 1/4. Anchors are generated once by Taylor stepping that
//!   starts from the asymptotic expansion at `x = 12` (stepping leftwards,
//!   the stable direction for the recessive solution) and at `x = -16`;
//! * otherwise: asymptotic expansions truncated at the smallest term.
//!
//! A single switch point at `|x| = 4.5` between series and asymptotics
//! cannot reach `1e-12`: the series loses digits to cancellation there and
//! the asymptotic series' smallest term is still about `1e-9`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::SpecfunError;

/// Validated argument range.
pub const AIRY_RANGE: (f64, f64) = (-40.0, 40.0);

const AI0: f64 = 0.355_028_053_887_817_239_26;
const AIP0: f64 = -0.258_819_403_792_806_798_40;
/// `Bi(0) = sqrt(3) Ai(0)`, `Bi'(0) = -sqrt(3) Ai'(0)`.
const BI0: f64 = 0.614_926_627_446_000_735_15;
const BIP0: f64 = 0.448_288_357_353_826_357_91;

const SERIES_LIMIT: f64 = 2.0;
const ANCHOR_HI: f64 = 12.0;
const ANCHOR_LO: f64 = -16.0;
const ANCHOR_STEP: f64 = 0.25;

/// The two power series `f = 1 + x^3/6 + ...`, `g = x + x^4/12 + ...` and
/// their derivatives, with `Ai = Ai(0) f + Ai'(0) g`.
fn maclaurin(x: f64) -> [f64; 4] {
    if x == 0.0 {
        return [1.0, 0.0, 0.0, 1.0];
    }
    let x3 = x * x * x;
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let mut tf = 1.0;
    let mut tg = x;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        // f-term x^{3k}: multiply by x^3 / ((3k-1)(3k)); g-term x^{3k+1}: by x^3 / ((3k)(3k+1)).
        tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        fp += tf * 3.0 * k / x;
        gp += tg * (3.0 * k + 1.0) / x;
        if (tf.abs() + tg.abs()) < 1e-18 * (f.abs() + g.abs()) || k > 60.0 {
            break;
        }
    }
    [f, fp, g, gp]
}

fn ai_series(x: f64) -> (f64, f64) {
    let [f, fp, g, gp] = maclaurin(x);
    (AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp)
}

/// `Bi` and `Bi'` in the series regime, used to verify the Wronskian.
pub fn airy_bi_series(x: f64) -> (f64, f64) {
    let [f, fp, g, gp] = maclaurin(x);
    (BI0 * f + BIP0 * g, BI0 * fp + BIP0 * gp)
}

/// Coefficients `u_k` of the asymptotic expansion.
fn u_coeffs() -> &'static [f64] {
    static U: OnceLock<Vec<f64>> = OnceLock::new();
    U.get_or_init(|| {
        let mut u = vec![1.0];
        for k in 1..60 {
            let kf = k as f64;
            let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            u.push(next);
        }
        u
    })
}

fn v_coeff(k: usize) -> f64 {
    let kf = k as f64;
    -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u_coeffs()[k]
}

/// Sums `sum c_k (-1/zeta)^k` (`sign = -1`) or with alternation handled by
/// the caller, truncated before the terms start growing.
fn optimal_sum(zeta: f64, coeff: impl Fn(usize) -> f64, alternate: bool, stride: usize, offset: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut j = 0;
    loop {
        let k = stride * j + offset;
        if k >= u_coeffs().len() {
            break;
        }
        let sign = if alternate && j % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * coeff(k) / zeta.powi(k as i32);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if prev < 1e-18 * sum.abs() {
            break;
        }
        j += 1;
    }
    sum
}

fn ai_asymptotic_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let su = optimal_sum(zeta, |k| u_coeffs()[k], true, 1, 0);
    let sv = optimal_sum(zeta, v_coeff, true, 1, 0);
    (e / x.powf(0.25) * su, -e * x.powf(0.25) * sv)
}

fn ai_asymptotic_neg(x: f64) -> (f64, f64) {
    let z = -x;
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (s, c) = (zeta - PI / 4.0).sin_cos();
    let u_even = optimal_sum(zeta, |k| u_coeffs()[k], true, 2, 0);
    let u_odd = optimal_sum(zeta, |k| u_coeffs()[k], true, 2, 1);
    let v_even = optimal_sum(zeta, v_coeff, true, 2, 0);
    let v_odd = optimal_sum(zeta, v_coeff, true, 2, 1);
    let sp = PI.sqrt();
    let ai = (c * u_even + s * u_odd) / (sp * z.powf(0.25));
    let aip = z.powf(0.25) / sp * (s * v_even - c * v_odd);
    (ai, aip)
}

/// Taylor expansion of a solution of `y'' = x y` about `x0` evaluated at
/// `x0 + h`, from `(y, y')` at `x0`.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // c_k = y^{(k)}(x0)/k!, (k+2)(k+1) c_{k+2} = x0 c_k + c_{k-1}.
    let mut c = [0.0_f64; 64];
    c[0] = y;
    c[1] = yp;
    let mut val = y + yp * h;
    let mut der = yp;
    let mut hp = 1.0; // h^{k-1}
    let mut hk = h; // h^k
    let scale = y.abs() + yp.abs();
    for k in 2..64 {
        let prev2 = if k >= 3 { c[k - 3] } else { 0.0 };
        c[k] = (x0 * c[k - 2] + prev2) / ((k * (k - 1)) as f64);
        hk *= h;
        hp *= h;
        val += c[k] * hk;
        der += (k as f64) * c[k] * hp;
        if k > 8 && (c[k].abs() + c[k - 1].abs()) * hk.abs().max(hp.abs()) < 1e-19 * scale {
            break;
        }
    }
    (val, der)
}

struct Anchors {
    values: Vec<(f64, f64)>,
}

impl Anchors {
    fn index_of(x: f64) -> usize {
        ((x - ANCHOR_LO) / ANCHOR_STEP).round() as usize
    }

    fn location(i: usize) -> f64 {
        ANCHOR_LO + i as f64 * ANCHOR_STEP
    }
}

fn anchors() -> &'static Anchors {
    static A: OnceLock<Anchors> = OnceLock::new();
    A.get_or_init(|| {
        let count = ((ANCHOR_HI - ANCHOR_LO) / ANCHOR_STEP).round() as usize + 1;
        let mut values = vec![(0.0, 0.0); count];
        // Right part: step left from the asymptotic value at ANCHOR_HI to 0.
        let zero = Anchors::index_of(0.0);
        let mut cur = ai_asymptotic_pos(ANCHOR_HI);
        values[count - 1] = cur;
        for i in (zero..count - 1).rev() {
            let x0 = Anchors::location(i + 1);
            cur = substep(x0, cur, -ANCHOR_STEP);
            values[i] = cur;
        }
        // Left part: step right from the asymptotic value at ANCHOR_LO to 0.
        let mut cur = ai_asymptotic_neg(ANCHOR_LO);
        values[0] = cur;
        for i in 1..zero {
            let x0 = Anchors::location(i - 1);
            cur = substep(x0, cur, ANCHOR_STEP);
            values[i] = cur;
        }
        Anchors { values }
    })
}

/// One anchor step split in two halves for a comfortable Taylor radius.
fn substep(x0: f64, (y, yp): (f64, f64), h: f64) -> (f64, f64) {
    let (y1, yp1) = taylor_step(x0, y, yp, h / 2.0);
    taylor_step(x0 + h / 2.0, y1, yp1, h / 2.0)
}

/// `(Ai(x), Ai'(x))` without the range check. Beyond `x = 40` the value
/// underflows any useful scale and `(0, 0)` is returned.
pub fn airy_ai_unchecked(x: f64) -> (f64, f64) {
    if x.abs() <= SERIES_LIMIT {
        ai_series(x)
    } else if x > AIRY_RANGE.1 {
        (0.0, 0.0)
    } else if x > ANCHOR_HI {
        ai_asymptotic_pos(x)
    } else if x < ANCHOR_LO {
        ai_asymptotic_neg(x)
    } else {
        let i = Anchors::index_of(x);
        let x0 = Anchors::location(i);
        let (y, yp) = anchors().values[i];
        taylor_step(x0, y, yp, x - x0)
    }
}

fn check(x: f64) -> Result<(), SpecfunError> {
    if x.is_finite() && x >= AIRY_RANGE.0 && x <= AIRY_RANGE.1 {
        Ok(())
    } else {
        Err(SpecfunError::OutOfValidatedRange { x, lo: AIRY_RANGE.0, hi: AIRY_RANGE.1 })
    }
}

/// `(Ai(x), Ai'(x))` for `x` in [`AIRY_RANGE`].
pub fn airy_ai_pair(x: f64) -> Result<(f64, f64), SpecfunError> {
    check(x)?;
    Ok(airy_ai_unchecked(x))
}

pub fn airy_ai(x: f64) -> Result<f64, SpecfunError> {
    airy_ai_pair(x).map(|p| p.0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64, SpecfunError> {
    airy_ai_pair(x).map(|p| p.1)
}
