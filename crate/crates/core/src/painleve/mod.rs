//! Boundary-value solver for the pole-free solution of the Painlevé II
//! hierarchy with `alpha = 1/2`, and for the Hastings–McLeod solution.
//!
//! The real line is truncated to `[x_L, x_R]`. Each end carries `n`
//! boundary conditions taken from the solution's asymptotic behaviour,
//! and the order-`2n` equation is discretized by [`colloc`].

pub mod asymptotic;
pub mod colloc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffpoly::{CompiledEquation, DiffPolyError};

pub use asymptotic::{asymptotic_bc, minus_coefficient, HierarchyParts, Infinity};
pub use colloc::{
    initial_from_jets, BoundaryCondition, CollocEquation, CollocSolution, InitialState, NewtonOptions, Side,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PainleveError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("asymptotic boundary data requested at |x| = {} < 4", x.abs())]
    DomainTooSmall { x: f64 },
    #[error("no positive algebraic balance root at x = {x}")]
    NoBalancedRoot { x: f64 },
    #[error("Newton iteration diverged; last residual {residual:e}")]
    NewtonDiverged { residual: f64 },
    #[error("residual {residual:e} above tolerance {tol:e}")]
    ResidualAboveTolerance { residual: f64, tol: f64 },
    #[error("collocation Jacobian is singular")]
    SingularJacobian,
    #[error("solution domain does not cover x = {x}")]
    DomainMismatch { x: f64 },
    #[error("continuation stalled at path point {index} after {bisections} bisections: {last}")]
    ContinuationStalled { index: usize, bisections: usize, last: Box<PainleveError> },
    #[error(transparent)]
    Algebra(#[from] DiffPolyError),
}

impl CollocEquation for CompiledEquation {
    fn order(&self) -> usize {
        CompiledEquation::order(self)
    }
    fn residual(&self, x: f64, jet: &[f64]) -> f64 {
        CompiledEquation::residual(self, x, jet)
    }
    fn partials(&self, x: f64, jet: &[f64], out: &mut [f64]) {
        CompiledEquation::partials(self, x, jet, out)
    }
}

/// How the `2n` boundary conditions are produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BcRecipe {
    /// Jets of the leading asymptotic terms only ([`asymptotic_bc`]).
    Leading,
    /// Leading terms corrected by `iterations` rounds of the asymptotic
    /// fixed points in [`HierarchyParts`], including `alpha` and `tau`.
    Refined { iterations: usize },
}

/// Built-in initial guesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GuessKind {
    /// Largest positive root of the algebraic balance, with exact jets.
    BalancedRoot,
    /// Minus-side leading term for `x <= -1`, `alpha/x` for `x >= 1`,
    /// linear in between.
    Blend,
}

/// One boundary-value problem for `P_II^{(n)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiiProblem {
    pub n: usize,
    pub alpha: f64,
    pub tau: Vec<f64>,
    pub domain: (f64, f64),
    /// Collocation uses `degree + 1` points.
    pub degree: usize,
    pub bc: BcRecipe,
    pub guess: GuessKind,
    pub newton: NewtonOptions,
}

impl PiiProblem {
    /// Defaults: `[-12, 10]` for `n = 1`, `[-12, 14]` otherwise; 400 points.
    pub fn new(n: usize, alpha: f64, tau: Vec<f64>) -> Self {
        let domain = if n == 1 { (-12.0, 10.0) } else { (-12.0, 14.0) };
        PiiProblem {
            n,
            alpha,
            tau,
            domain,
            degree: 400,
            bc: BcRecipe::Refined { iterations: 4 },
            guess: GuessKind::BalancedRoot,
            newton: NewtonOptions::default(),
        }
    }

    pub fn with_domain(mut self, a: f64, b: f64) -> Self {
        self.domain = (a, b);
        self
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn with_bc(mut self, bc: BcRecipe) -> Self {
        self.bc = bc;
        self
    }

    pub fn with_guess(mut self, guess: GuessKind) -> Self {
        self.guess = guess;
        self
    }

    pub fn validate(&self) -> Result<(), PainleveError> {
        let bad = |m: String| Err(PainleveError::InvalidProblem(m));
        if self.n % 2 == 0 || self.n == 0 {
            return bad(format!("n = {} must be odd", self.n));
        }
        if self.tau.len() != self.n - 1 {
            return bad(format!("expected {} tau values, got {}", self.n - 1, self.tau.len()));
        }
        if self.degree < 8 * self.n {
            return bad(format!("degree {} below 8n", self.degree));
        }
        let (a, b) = self.domain;
        if !(b >= 4.0 && a <= -6.0) {
            return bad(format!("domain [{a}, {b}] must satisfy x_L <= -6, x_R >= 4"));
        }
        if !self.alpha.is_finite() || self.tau.iter().any(|t| !t.is_finite()) {
            return bad("non-finite parameter".into());
        }
        Ok(())
    }

    fn is_hastings_mcleod(&self) -> bool {
        self.n == 1 && self.alpha == 0.0
    }

    /// The `2n` boundary conditions and an error estimate for them.
    pub fn boundary_conditions(&self, parts: &HierarchyParts) -> Result<(Vec<BoundaryCondition>, f64), PainleveError> {
        let (a, b) = self.domain;
        let (left, right, est) = match self.bc {
            BcRecipe::Leading => (
                asymptotic_bc(self.n, self.alpha, Infinity::Minus, a)?,
                asymptotic_bc(self.n, self.alpha, Infinity::Plus, b)?,
                f64::NAN,
            ),
            BcRecipe::Refined { .. } if self.is_hastings_mcleod() => (
                asymptotic_bc(1, 0.0, Infinity::Minus, a)?,
                asymptotic_bc(1, 0.0, Infinity::Plus, b)?,
                f64::NAN,
            ),
            BcRecipe::Refined { iterations } => {
                let (l, el) = parts.refined_minus(a, iterations)?;
                let (r, er) = parts.refined_plus(b, iterations);
                (l, r, el.max(er))
            }
        };
        let mut bcs = Vec::with_capacity(2 * self.n);
        for (d, v) in left.into_iter().enumerate() {
            bcs.push(BoundaryCondition { side: Side::Left, derivative: d, value: v });
        }
        for (d, v) in right.into_iter().enumerate() {
            bcs.push(BoundaryCondition { side: Side::Right, derivative: d, value: v });
        }
        Ok((bcs, est))
    }

    /// Built-in initial state.
    pub fn initial_state(&self, parts: &HierarchyParts) -> Result<InitialState, PainleveError> {
        let (a, b) = self.domain;
        let m = 2 * self.n;
        if self.is_hastings_mcleod() {
            // sqrt((sqrt(x^2 + 1) - x)/4): sqrt(-x/2) at -inf, decaying at +inf.
            return Ok(initial_from_jets(a, b, self.degree, m, |x0| {
                let x = crate::jet::Jet::variable(x0, m + 1);
                let r = (&x * &x).add_scalar(1.0).sqrt();
                (&r - &x).scale(0.25).sqrt().derivatives(m)
            }));
        }
        match self.guess {
            GuessKind::BalancedRoot => {
                let mut failure = None;
                let state = initial_from_jets(a, b, self.degree, m, |x0| match parts.balanced_root(x0, m + 1) {
                    Some(j) => j.derivatives(m),
                    None => {
                        failure = Some(x0);
                        vec![0.0; m + 1]
                    }
                });
                match failure {
                    Some(x) => Err(PainleveError::NoBalancedRoot { x }),
                    None => Ok(state),
                }
            }
            GuessKind::Blend => {
                let minus = |x: f64| minus_coefficient(self.n) * (-x).powf(1.0 / m as f64);
                let plus = |x: f64| self.alpha / x;
                let values: Vec<f64> = crate::cheb::mapped_points(a, b, self.degree)
                    .into_iter()
                    .map(|x| {
                        if x <= -1.0 {
                            minus(x)
                        } else if x >= 1.0 {
                            plus(x)
                        } else {
                            let t = (x + 1.0) / 2.0;
                            (1.0 - t) * minus(-1.0) + t * plus(1.0)
                        }
                    })
                    .collect();
                Ok(initial_from_values(a, b, m, &values))
            }
        }
    }
}

/// Initial state reproducing the interpolant through `values` at the
/// mapped Lobatto points.
pub fn initial_from_values(a: f64, b: f64, order: usize, values: &[f64]) -> InitialState {
    let mut s = crate::cheb::ChebSeries::from_values(a, b, values);
    let mut left = Vec::with_capacity(order);
    for _ in 0..order {
        left.push(s.eval(a));
        s = s.derivative();
    }
    let top = crate::cheb::mapped_points(a, b, values.len() - 1).into_iter().map(|x| s.eval(x)).collect();
    InitialState { top, left_jet: left }
}

/// A solved hierarchy problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiiSolution {
    pub problem: PiiProblem,
    pub solution: CollocSolution,
    /// Size of the last asymptotic correction applied to the boundary data
    /// (NaN for the leading recipe).
    pub bc_change: f64,
}

impl PiiSolution {
    pub fn q(&self, x: f64) -> f64 {
        self.solution.value(x)
    }

    pub fn eval(&self, d: usize, x: f64) -> f64 {
        self.solution.eval(d, x)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.solution.domain()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.solution.contains(x)
    }

    /// CSV with columns `x, q, q', ..., q^{(2n-1)}` at the given points.
    pub fn to_csv(&self, xs: &[f64]) -> String {
        let m = 2 * self.problem.n;
        let mut out = String::from("x,q");
        for d in 1..m {
            out.push_str(&format!(",q_d{d}"));
        }
        out.push('\n');
        for &x in xs {
            out.push_str(&format!("{x:.17e}"));
            for v in self.solution.jet(x, m - 1) {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Solves `problem`, starting from `guess` or from the built-in guess.
pub fn solve_q(problem: &PiiProblem, guess: Option<&CollocSolution>) -> Result<PiiSolution, PainleveError> {
    problem.validate()?;
    let parts = HierarchyParts::new(problem.n, problem.alpha, &problem.tau)?;
    let eq = CompiledEquation::new(&crate::diffpoly::pii_equation(problem.n)?, problem.alpha, &problem.tau)?;
    let (bcs, bc_change) = problem.boundary_conditions(&parts)?;
    let (a, b) = problem.domain;
    let init = match guess {
        Some(g) => g.seed(a, b, problem.degree),
        None => problem.initial_state(&parts)?,
    };
    let solution = colloc::solve(&eq, a, b, problem.degree, &bcs, &init, &problem.newton)?;
    Ok(PiiSolution { problem: problem.clone(), solution, bc_change })
}

/// The Hastings–McLeod solution of `q'' = xq + 2q^3` with
/// `q(x_R) = Ai(x_R)` and `q(x_L) = sqrt(-x_L/2)(1 + 1/(8 x_L^3))`.
pub fn hastings_mcleod(domain: (f64, f64), degree: usize) -> Result<PiiSolution, PainleveError> {
    if domain.0 > -10.0 || domain.1 < 8.0 {
        return Err(PainleveError::InvalidProblem("domain must contain [-10, 8]".into()));
    }
    let problem = PiiProblem::new(1, 0.0, Vec::new()).with_domain(domain.0, domain.1).with_degree(degree);
    solve_q(&problem, None)
}

/// Max over `points + 1` equispaced `x` in `[lo, hi]` of
/// `|2^{-4/3}(x + 2q^2 + 2q_x) - q_0(-2^{-1/3} x)^2|`, with its location.
pub fn backlund_residual(
    q: &PiiSolution,
    q0: &PiiSolution,
    (lo, hi): (f64, f64),
    points: usize,
) -> Result<(f64, f64), PainleveError> {
    let c = 2f64.powf(-1.0 / 3.0);
    let mut worst = (0.0, lo);
    for i in 0..=points {
        let x = lo + (hi - lo) * i as f64 / points as f64;
        let y = -c * x;
        if !q.contains(x) {
            return Err(PainleveError::DomainMismatch { x });
        }
        if !q0.contains(y) {
            return Err(PainleveError::DomainMismatch { x: y });
        }
        let lhs = c.powi(4) * (x + 2.0 * q.q(x).powi(2) + 2.0 * q.eval(1, x));
        let r = (lhs - q0.q(y).powi(2)).abs();
        if r > worst.0 {
            worst = (r, x);
        }
    }
    Ok(worst)
}

/// One point of a continuation path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub tau: Vec<f64>,
    pub domain: (f64, f64),
}

/// Solves along `path`, seeding each solve with the previous solution.
/// A failed step is bisected in `tau` and domain, at most
/// `max_bisections` levels deep.
pub fn continuation_solve(
    base: &PiiProblem,
    path: &[PathPoint],
    seed: &PiiSolution,
    max_bisections: usize,
) -> Result<Vec<PiiSolution>, PainleveError> {
    let mut out: Vec<PiiSolution> = Vec::with_capacity(path.len());
    let mut current = seed.clone();
    for (index, target) in path.iter().enumerate() {
        let next = advance(base, &current, target, max_bisections)
            .map_err(|(bisections, last)| PainleveError::ContinuationStalled { index, bisections, last: Box::new(last) })?;
        current = next.clone();
        out.push(next);
    }
    Ok(out)
}

fn problem_at(base: &PiiProblem, p: &PathPoint) -> PiiProblem {
    PiiProblem { tau: p.tau.clone(), domain: p.domain, ..base.clone() }
}

fn advance(
    base: &PiiProblem,
    from: &PiiSolution,
    target: &PathPoint,
    max_bisections: usize,
) -> Result<PiiSolution, (usize, PainleveError)> {
    let direct = solve_q(&problem_at(base, target), Some(&from.solution));
    match direct {
        Ok(s) => Ok(s),
        Err(e) if matches!(e, PainleveError::InvalidProblem(_) | PainleveError::Algebra(_)) => Err((0, e)),
        Err(e) => {
            if max_bisections == 0 {
                return Err((0, e));
            }
            let start = PathPoint { tau: from.problem.tau.clone(), domain: from.problem.domain };
            let mid = PathPoint {
                tau: start.tau.iter().zip(&target.tau).map(|(a, b)| 0.5 * (a + b)).collect(),
                domain: (0.5 * (start.domain.0 + target.domain.0), 0.5 * (start.domain.1 + target.domain.1)),
            };
            let half = advance(base, from, &mid, max_bisections - 1).map_err(|(d, e)| (d + 1, e))?;
            advance(base, &half, target, max_bisections - 1).map_err(|(d, e)| (d + 1, e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::airy_ai_pair;

    /// Integrates `q'' = xq + 2q^3` from `x = 8` down to `x = 0` with RK4,
    /// starting on the Airy tail.
    fn shooting_q0_at_zero() -> f64 {
        let f = |x: f64, (q, p): (f64, f64)| (p, x * q + 2.0 * q * q * q);
        let (mut x, h) = (8.0, -1e-3);
        let (ai, aip) = airy_ai_pair(x).unwrap();
        let mut y = (ai, aip);
        for _ in 0..8000 {
            let k1 = f(x, y);
            let k2 = f(x + h / 2.0, (y.0 + h / 2.0 * k1.0, y.1 + h / 2.0 * k1.1));
            let k3 = f(x + h / 2.0, (y.0 + h / 2.0 * k2.0, y.1 + h / 2.0 * k2.1));
            let k4 = f(x + h, (y.0 + h * k3.0, y.1 + h * k3.1));
            y.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            y.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            x += h;
        }
        y.0
    }

    fn hm() -> PiiSolution {
        hastings_mcleod((-14.0, 12.0), 300).unwrap()
    }

    #[test]
    fn hastings_mcleod_against_shooting_and_tails() {
        let q0 = hm();
        let shot = shooting_q0_at_zero();
        assert!((q0.q(0.0) - shot).abs() < 1e-6, "{} {shot}", q0.q(0.0));
        assert!((q0.q(0.0) - 0.367_061_551_548_07).abs() < 1e-9);
        let ratio = q0.q(4.0) / airy_ai_pair(4.0).unwrap().0;
        assert!((ratio - 1.0).abs() < 1e-4, "{ratio}");
        let x: f64 = -8.0;
        let correction = q0.q(x) / (-x / 2.0).sqrt() - 1.0;
        let want = 1.0 / (8.0 * x.powi(3));
        assert!((correction / want - 1.0).abs() < 0.1, "{correction} {want}");
        assert!(q0.solution.max_residual <= 1e-10);
        assert!(matches!(hastings_mcleod((-8.0, 12.0), 300), Err(PainleveError::InvalidProblem(_))));
    }

    #[test]
    fn backlund_links_alpha_half_to_hastings_mcleod() {
        let q = solve_q(&PiiProblem::new(1, 0.5, Vec::new()), None).unwrap();
        let q0 = hm();
        let (worst, _) = backlund_residual(&q, &q0, (-4.0, 4.0), 200).unwrap();
        assert!(worst <= 1e-6, "{worst}");
        assert!(matches!(backlund_residual(&q, &q0, (-4.0, 40.0), 10), Err(PainleveError::DomainMismatch { .. })));
    }

    fn base3() -> PiiProblem {
        PiiProblem::new(3, 0.5, vec![0.0, 0.0])
    }

    #[test]
    fn continuation_constant_and_ramp() {
        let base = base3();
        let seed = solve_q(&base, None).unwrap();
        let same = PathPoint { tau: vec![0.0, 0.0], domain: base.domain };
        let out = continuation_solve(&base, &[same], &seed, 0).unwrap();
        assert!((out[0].q(1.0) - seed.q(1.0)).abs() < 1e-9);

        let path: Vec<PathPoint> =
            (1..=4).map(|i| PathPoint { tau: vec![0.5 * i as f64, -0.25 * i as f64], domain: base.domain }).collect();
        let ramp = continuation_solve(&base, &path, &seed, 3).unwrap();
        assert_eq!(ramp.len(), 4);
        let cold = solve_q(&PiiProblem { tau: vec![2.0, -1.0], ..base.clone() }, Some(&ramp[2].solution)).unwrap();
        assert!((ramp[3].q(0.5) - cold.q(0.5)).abs() < 1e-8);
        assert!(ramp.iter().all(|s| s.solution.max_residual <= base.newton.tol));
    }

    #[test]
    fn continuation_reports_a_stall() {
        let base = base3();
        let seed = solve_q(&base, None).unwrap();
        let far = PathPoint { tau: vec![-100.0, 0.0], domain: base.domain };
        match continuation_solve(&base, &[far], &seed, 0) {
            Err(PainleveError::ContinuationStalled { index: 0, bisections: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_and_validation() {
        let q0 = hm();
        let csv = q0.to_csv(&[-1.0, 0.0, 1.0]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,q,q_d1");
        assert_eq!(lines.len(), 4);
        let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row[0], 0.0);
        assert!((row[1] - q0.q(0.0)).abs() < 1e-15);

        for bad in [
            PiiProblem::new(2, 0.5, vec![0.0]),
            PiiProblem::new(3, 0.5, vec![0.0]),
            PiiProblem::new(3, 0.5, vec![0.0, 0.0]).with_degree(10),
            PiiProblem::new(1, 0.5, Vec::new()).with_domain(-3.0, 10.0),
            PiiProblem::new(1, f64::NAN, Vec::new()),
        ] {
            assert!(matches!(solve_q(&bad, None), Err(PainleveError::InvalidProblem(_))), "{bad:?}");
        }
    }
}
