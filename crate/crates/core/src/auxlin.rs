//! The auxiliary linear problem `u'' = (q_x + q^2) u`, its recessive
//! solution `u`, and the accumulated mass `Q(x) = int_{-inf}^x u^2`.
//!
//! Two representations of `u` are provided: a linear collocation solve
//! ([`solve_u`]) and the closed form ([`ClosedFormU`])
//! `u(x) = C sqrt(x/2) exp(-int_x^inf (q - 1/(2 xi)) d xi)`,
//! `C = 2^{-(4k+1)/(4k+3)}`, which reduces to
//! `u(x) = u(x_R) exp(-int_x^{x_R} q)` inside the solved domain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb::ChebSeries;
use crate::painleve::colloc::{self, BoundaryCondition, CollocEquation, CollocSolution, NewtonOptions, Side};
use crate::painleve::{BcRecipe, HierarchyParts, PainleveError, PiiSolution};
use crate::specfun::gauss_legendre;

/// Tail estimates above this are rejected; `u^2` then carries a relative
/// error of at most `2 * TAIL_TOLERANCE`.
pub const TAIL_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuxlinError {
    #[error("q does not solve the order 2k+1 equation with alpha = 1/2 (n = {n}, alpha = {alpha})")]
    WrongHierarchyMember { n: usize, alpha: f64 },
    #[error("linear system for u is singular")]
    SingularLinearSystem,
    #[error("tail estimate beyond x_R = {x_r} is unreliable (bound {bound:e})")]
    TailEstimateUnreliable { x_r: f64, bound: f64 },
    #[error("x = {x} lies outside the domain of q")]
    DomainMismatch { x: f64 },
    #[error(transparent)]
    Painleve(#[from] PainleveError),
}

fn hierarchy_k(q: &PiiSolution) -> Result<usize, AuxlinError> {
    let p = &q.problem;
    if p.n % 2 == 0 || p.alpha != 0.5 {
        return Err(AuxlinError::WrongHierarchyMember { n: p.n, alpha: p.alpha });
    }
    Ok((p.n - 1) / 2)
}

/// `2^{-(4k+1)/(4k+3)}`.
pub fn u_prefactor(k: usize) -> f64 {
    let k = k as f64;
    2f64.powf(-(4.0 * k + 1.0) / (4.0 * k + 3.0))
}

/// The potential `V = q_x + q^2` of the linear equation.
#[derive(Clone, Copy, Debug)]
pub struct PotentialFn<'a> {
    q: &'a CollocSolution,
}

impl<'a> PotentialFn<'a> {
    pub fn new(q: &'a PiiSolution) -> Self {
        PotentialFn { q: &q.solution }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = self.q.value(x);
        self.q.eval(1, x) + v * v
    }
}

impl CollocEquation for PotentialFn<'_> {
    fn order(&self) -> usize {
        2
    }
    fn residual(&self, x: f64, jet: &[f64]) -> f64 {
        jet[2] - self.eval(x) * jet[0]
    }
    fn partials(&self, x: f64, _jet: &[f64], out: &mut [f64]) {
        out[0] = -self.eval(x);
        out[1] = 0.0;
        out[2] = 1.0;
    }
}

/// `T(x_R) = int_{x_R}^inf (q - 1/(2 xi)) d xi` from the `+inf` asymptotic
/// series of `q`, with an error bound. The substitution `xi = x_R / r`
/// maps the tail to `r in (0, 1]`, where the integrand is smooth.
pub fn plus_tail(q: &PiiSolution) -> Result<(f64, f64), AuxlinError> {
    let p = &q.problem;
    let parts = HierarchyParts::new(p.n, p.alpha, &p.tau)?;
    let iterations = match p.bc {
        BcRecipe::Refined { iterations } => iterations.max(2),
        BcRecipe::Leading => 4,
    };
    let x_r = p.domain.1;
    let tail = |order: usize, iters: usize| {
        let rule = gauss_legendre(order).expect("fixed orders are valid");
        rule.integrate(|t| {
            let r = 0.5 * (t + 1.0);
            let xi = x_r / r;
            let qv = parts.plus_series(xi, iters, 1).0.value();
            0.5 * (qv - 0.5 / xi) * x_r / (r * r)
        })
    };
    let fine = tail(40, iterations);
    let coarse = tail(20, iterations);
    let shorter = tail(40, iterations - 1);
    // Mismatch between the collocated q and the series at the joint.
    let joint = (parts.plus_series(x_r, iterations, 1).0.value() - q.q(x_r)).abs() * x_r;
    let bound = (fine - coarse).abs() + (fine - shorter).abs() + joint;
    if !(bound <= TAIL_TOLERANCE) {
        return Err(AuxlinError::TailEstimateUnreliable { x_r, bound });
    }
    Ok((fine, bound))
}

/// `u` in closed form on the domain of `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormU {
    pub k: usize,
    /// `T(x_R)`.
    pub tail: f64,
    pub tail_bound: f64,
    /// `ln u(x_R)`.
    pub log_u_right: f64,
    /// `x -> int_{x_L}^x q`.
    pub int_q: ChebSeries,
}

impl ClosedFormU {
    pub fn new(q: &PiiSolution) -> Result<Self, AuxlinError> {
        let k = hierarchy_k(q)?;
        let (tail, tail_bound) = plus_tail(q)?;
        let x_r = q.domain().1;
        let log_u_right = u_prefactor(k).ln() + 0.5 * (0.5 * x_r).ln() - tail;
        Ok(ClosedFormU { k, tail, tail_bound, log_u_right, int_q: q.solution.derivs[0].cumulative_integral() })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.int_q.a, self.int_q.b)
    }

    /// `ln u(x)`.
    pub fn log_eval(&self, x: f64) -> Result<f64, AuxlinError> {
        if !self.int_q.contains(x) {
            return Err(AuxlinError::DomainMismatch { x });
        }
        Ok(self.log_u_right - (self.int_q.eval(self.int_q.b) - self.int_q.eval(x)))
    }

    pub fn eval(&self, x: f64) -> Result<f64, AuxlinError> {
        self.log_eval(x).map(f64::exp)
    }

    /// `Q` from the interpolant of `u`, with the exact lower tail
    /// `u(x_L)^2 / (2 q(x_L))` of the closed form (`u'/u = q`).
    pub fn q_function(&self, degree: usize) -> Result<QFunction, AuxlinError> {
        let a = self.int_q.a;
        let mut out = compute_q(&self.series(degree));
        let rate = self.int_q.derivative().eval(a);
        out.lower_tail = if rate > 0.0 { (2.0 * self.log_eval(a)?).exp() / (2.0 * rate) } else { f64::INFINITY };
        Ok(out)
    }

    /// Chebyshev interpolant of `u` with the given degree.
    pub fn series(&self, degree: usize) -> ChebSeries {
        let (a, b) = self.domain();
        let top = self.int_q.eval(b);
        ChebSeries::from_fn(a, b, degree, |x| (self.log_u_right - (top - self.int_q.eval(x))).exp())
    }
}

/// `u(x)` by the closed form. Builds the tail each call; use
/// [`ClosedFormU`] for repeated evaluation.
pub fn u_closed_form(q: &PiiSolution, x: f64) -> Result<f64, AuxlinError> {
    ClosedFormU::new(q)?.eval(x)
}

/// `u` by linear collocation with `u(x_L) = 0` and `u(x_R)` from the
/// closed form (leading behaviour times `exp(-T(x_R))`).
pub fn solve_u(q: &PiiSolution) -> Result<CollocSolution, AuxlinError> {
    let cf = ClosedFormU::new(q)?;
    let (a, b) = q.domain();
    let v = PotentialFn::new(q);
    let bcs = [
        BoundaryCondition { side: Side::Left, derivative: 0, value: 0.0 },
        BoundaryCondition { side: Side::Right, derivative: 0, value: cf.log_u_right.exp() },
    ];
    let degree = q.solution.degree;
    let init = colloc::initial_from_jets(a, b, degree, 2, |_| vec![0.0; 3]);
    let opts = NewtonOptions { tol: 1e-11, max_iter: 4, max_backtracks: 0, polish: false };
    colloc::solve(&v, a, b, degree, &bcs, &init, &opts).map_err(|e| match e {
        PainleveError::SingularJacobian => AuxlinError::SingularLinearSystem,
        other => other.into(),
    })
}

/// `Q(x) = int_{x_L}^x u^2`, with an estimate of the truncated mass
/// `int_{-inf}^{x_L} u^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFunction {
    pub cumulative: ChebSeries,
    /// Mass below `x_L` assuming `u` keeps decaying at the rate it has
    /// just inside the domain.
    pub lower_tail: f64,
}

impl QFunction {
    pub fn domain(&self) -> (f64, f64) {
        (self.cumulative.a, self.cumulative.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.cumulative.eval(x)
    }

    /// `Q(x)` including the estimated lower tail.
    pub fn eval_with_tail(&self, x: f64) -> f64 {
        self.eval(x) + self.lower_tail
    }

    /// `x -> int_{x_L}^x Q`.
    pub fn antiderivative(&self) -> ChebSeries {
        self.cumulative.cumulative_integral()
    }
}

/// Cumulative integral of `u^2`, resolved with twice the degree of `u`.
pub fn compute_q(u: &ChebSeries) -> QFunction {
    let degree = 2 * u.coeffs.len().max(2);
    let sq = ChebSeries::from_fn(u.a, u.b, degree, |x| u.eval(x).powi(2));
    let x1 = u.a + 0.01 * (u.b - u.a);
    let (u1, du1) = (u.eval(x1), u.derivative().eval(x1));
    let rate = du1 / u1;
    let lower_tail = if rate > 0.0 && u1.is_finite() {
        u1 * u1 / (2.0 * rate) * (-2.0 * rate * (x1 - u.a)).exp()
    } else {
        // No usable decay rate (u at roundoff level): bound by a flat tail.
        u1 * u1 * (x1 - u.a)
    };
    QFunction { cumulative: sq.cumulative_integral(), lower_tail }
}

/// CSV with columns `x, u, Q`.
pub fn to_csv(u: &ChebSeries, q: &QFunction, xs: &[f64]) -> String {
    let mut out = String::from("x,u,Q\n");
    for &x in xs {
        out.push_str(&format!("{x:.17e},{:.17e},{:.17e}\n", u.eval(x), q.eval(x)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::painleve::{hastings_mcleod, solve_q, PiiProblem};
    use std::sync::OnceLock;

    fn k0() -> &'static (PiiSolution, PiiSolution) {
        static CELL: OnceLock<(PiiSolution, PiiSolution)> = OnceLock::new();
        CELL.get_or_init(|| {
            let q = solve_q(&PiiProblem::new(1, 0.5, Vec::new()).with_domain(-16.0, 14.0).with_degree(300), None)
                .unwrap();
            let q0 = hastings_mcleod((-14.0, 12.0), 300).unwrap();
            (q, q0)
        })
    }

    fn scaled_q0(q0: &PiiSolution, x: f64) -> f64 {
        2f64.powf(-1.0 / 6.0) * q0.q(-(2f64.powf(-1.0 / 3.0)) * x)
    }

    #[test]
    fn k0_u_is_rescaled_hastings_mcleod() {
        let (q, q0) = k0();
        let u = solve_u(q).unwrap();
        let cf = ClosedFormU::new(q).unwrap();
        assert!(u.max_residual <= 1e-11);
        assert!(u.value(-16.0).abs() < 1e-14);
        for i in 0..=120 {
            let x = -6.0 + 0.1 * i as f64;
            let want = scaled_q0(q0, x);
            assert!((u.value(x) - want).abs() <= 1e-5, "solve_u at {x}");
            assert!((cf.eval(x).unwrap() - want).abs() <= 1e-5, "closed form at {x}");
        }
    }

    #[test]
    fn closed_form_agrees_with_linear_solve() {
        let (q, _) = k0();
        let u = solve_u(q).unwrap();
        let cf = ClosedFormU::new(q).unwrap();
        // Relative agreement starts 4 units in: the Dirichlet end perturbs
        // u by the ratio of recessive to dominant solutions.
        for i in 0..=200 {
            let x = -12.0 + 24.0 * i as f64 / 200.0;
            let (a, b) = (u.value(x), cf.eval(x).unwrap());
            assert!(((a - b) / b).abs() <= 1e-5, "{x}: {a} {b}");
        }
    }

    #[test]
    fn closed_form_at_pivot_and_leading_behaviour() {
        let (q, _) = k0();
        let cf = ClosedFormU::new(q).unwrap();
        // u(2) = C exp(-int_2^inf (q - 1/(2 xi)))
        let int_2_xr = cf.int_q.eval(14.0) - cf.int_q.eval(2.0) - 0.5 * (14.0f64 / 2.0).ln();
        let want = u_prefactor(0) * (-int_2_xr - cf.tail).exp();
        assert!((cf.eval(2.0).unwrap() / want - 1.0).abs() < 1e-13);
        let r = cf.eval(4.0).unwrap() / (2f64.powf(-1.0 / 3.0) * 2f64.sqrt());
        assert!((r - 1.0).abs() < 1e-2, "{r}");
        assert!(cf.tail_bound < TAIL_TOLERANCE);
        assert!(matches!(cf.eval(20.0), Err(AuxlinError::DomainMismatch { .. })));
    }

    #[test]
    fn q_is_monotone_and_matches_tw_integral() {
        let (q, q0) = k0();
        let cf = ClosedFormU::new(q).unwrap();
        let qf = compute_q(&cf.series(300));
        assert!(qf.eval(-16.0).abs() < 1e-14);
        assert!(qf.lower_tail < 1e-15);
        let mut prev = -1.0;
        for i in 0..=300 {
            let x = -16.0 + 0.1 * i as f64;
            let v = qf.eval(x);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        // Q(x(s)) = int_s^inf q_0^2 at s = -2
        let s = -2.0;
        let sq = ChebSeries::from_fn(s, 12.0, 200, |y| q0.q(y).powi(2));
        let want = sq.definite_integral();
        let got = qf.eval(-(2f64.powf(1.0 / 3.0)) * s);
        assert!((got - want).abs() < 1e-5, "{got} {want}");
    }

    #[test]
    fn closed_form_lower_tail() {
        let (q, _) = k0();
        let cf = ClosedFormU::new(q).unwrap();
        let qf = cf.q_function(300).unwrap();
        let u = cf.eval(-16.0).unwrap();
        assert!(qf.lower_tail > 0.0 && qf.lower_tail < u * u);
    }

    #[test]
    fn dq_dx_is_u_squared() {
        let (q, _) = k0();
        let cf = ClosedFormU::new(q).unwrap();
        let u = cf.series(300);
        let d = compute_q(&u).cumulative.derivative();
        for i in 0..=50 {
            let x = -15.0 + 0.5 * i as f64;
            assert!((d.eval(x) - u.eval(x).powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_non_hierarchy_problems() {
        let (_, q0) = k0();
        assert!(matches!(ClosedFormU::new(q0), Err(AuxlinError::WrongHierarchyMember { .. })));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let (q, _) = k0();
        let u = ClosedFormU::new(q).unwrap().series(200);
        let csv = to_csv(&u, &compute_q(&u), &[0.0, 1.0]);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("x,u,Q\n"));
    }
}
