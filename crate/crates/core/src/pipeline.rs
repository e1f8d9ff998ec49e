//! End-to-end routes to `ln det(I - K_s)`.
//!
//! * k = 0: one solve of the `n = 1` equation gives `F(s) = Q(x(s))` with
//!   `x = -2^{1/3} s`; the Hastings–McLeod solution gives the
//!   Tracy–Widom integral `-int_s^inf (y - s) q_0(y)^2 dy`; the Nyström
//!   determinant is the third, independent route.
//! * any k: a continuation sweep in `s` solves `q(.; tau(s))`, forms
//!   `F(s) = Q(x(s))`, and integrates `ln det(s) = -int_s^{S_+} F` with
//!   `ln det(S_+) ~ 0`.

use rayon::join;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auxlin::{AuxlinError, ClosedFormU, QFunction};
use crate::cheb::ChebSeries;
use crate::fredholm::{airy_kernel, nystrom_lndet, FredholmError, NystromConfig};
use crate::maps::{param_taus, param_x, FSamples, MapsError, SAMPLE_RULE_DEGREE};
use crate::painleve::{
    continuation_solve, hastings_mcleod, solve_q, BcRecipe, HierarchyParts, PainleveError, PathPoint, PiiProblem,
    PiiSolution,
};
use crate::specfun::{cumulative_samples, SpecfunError};

/// Anchor of the `s`-integration: `ln det(S_+) ~ 0` there.
pub const S_PLUS: f64 = 6.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("sweep failed at s = {s} after {} completed points: {source}", completed.len())]
    SweepFailed { s: f64, completed: Vec<SweepPoint>, source: Box<PipelineError> },
    #[error(transparent)]
    Painleve(#[from] PainleveError),
    #[error(transparent)]
    Auxlin(#[from] AuxlinError),
    #[error(transparent)]
    Maps(#[from] MapsError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error(transparent)]
    Quadrature(#[from] SpecfunError),
}

/// `F` and its antiderivative from a single `n = 1` solve.
#[derive(Clone, Debug)]
pub struct K0Painleve {
    pub q: PiiSolution,
    pub u: ClosedFormU,
    pub qfun: QFunction,
    q_anti: ChebSeries,
}

fn cube_root_two() -> f64 {
    2f64.powf(1.0 / 3.0)
}

impl K0Painleve {
    /// Domain `[-16, 14]` covers `x(s)` for `s in [-8, 6]` with margin.
    pub fn new(degree: usize) -> Result<Self, PipelineError> {
        let q = solve_q(&PiiProblem::new(1, 0.5, Vec::new()).with_domain(-16.0, 14.0).with_degree(degree), None)?;
        let u = ClosedFormU::new(&q)?;
        let qfun = u.q_function(degree)?;
        let q_anti = qfun.antiderivative();
        Ok(K0Painleve { q, u, qfun, q_anti })
    }

    fn x_of(&self, s: f64) -> Result<f64, PipelineError> {
        let x = -cube_root_two() * s;
        if !self.qfun.cumulative.contains(x) {
            return Err(AuxlinError::DomainMismatch { x }.into());
        }
        Ok(x)
    }

    /// `F(s) = Q(-2^{1/3} s)`.
    pub fn f(&self, s: f64) -> Result<f64, PipelineError> {
        Ok(self.qfun.eval_with_tail(self.x_of(s)?))
    }

    /// `-int_s^{S_+} F = -2^{-1/3} int_{x(S_+)}^{x(s)} Q dx`.
    pub fn lndet(&self, s: f64) -> Result<f64, PipelineError> {
        let (x, x_plus) = (self.x_of(s)?, self.x_of(S_PLUS)?);
        let tail = self.qfun.lower_tail * (x - x_plus);
        Ok(-(self.q_anti.eval(x) - self.q_anti.eval(x_plus) + tail) / cube_root_two())
    }
}

/// The Tracy–Widom integral `-int_s^inf (y - s) q_0(y)^2 dy` from a
/// Hastings–McLeod solve; the mass beyond the right end is below 1e-20.
#[derive(Clone, Debug)]
pub struct TwIntegral {
    pub q0: PiiSolution,
    mass: ChebSeries,
    moment: ChebSeries,
}

impl TwIntegral {
    pub fn new(degree: usize) -> Result<Self, PipelineError> {
        let q0 = hastings_mcleod((-14.0, 12.0), degree)?;
        let (a, b) = q0.domain();
        let sq = |y: f64| q0.q(y).powi(2);
        let mass = ChebSeries::from_fn(a, b, 2 * degree, sq).cumulative_integral();
        let moment = ChebSeries::from_fn(a, b, 2 * degree, |y| y * sq(y)).cumulative_integral();
        Ok(TwIntegral { q0, mass, moment })
    }

    pub fn lndet(&self, s: f64) -> Result<f64, PipelineError> {
        if !self.mass.contains(s) {
            return Err(PainleveError::DomainMismatch { x: s }.into());
        }
        let b = self.mass.b;
        let m = self.mass.eval(b) - self.mass.eval(s);
        let y = self.moment.eval(b) - self.moment.eval(s);
        Ok(-(y - s * m))
    }

    /// `int_s^inf q_0^2`, the first derivative of `ln det`.
    pub fn f(&self, s: f64) -> Result<f64, PipelineError> {
        if !self.mass.contains(s) {
            return Err(PainleveError::DomainMismatch { x: s }.into());
        }
        Ok(self.mass.eval(self.mass.b) - self.mass.eval(s))
    }

    /// `-q_0(s)^2`, the second derivative of `ln det`.
    pub fn second_derivative(&self, s: f64) -> f64 {
        -self.q0.q(s).powi(2)
    }
}

/// One row of the k = 0 three-route comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K0Row {
    pub s: f64,
    pub f: f64,
    pub nystrom: f64,
    pub tw_integral: f64,
    pub painleve: f64,
}

/// Pairwise maxima of `|Δ ln det|` across the three k = 0 routes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct K0Comparison {
    pub rows: Vec<K0Row>,
    pub nystrom_vs_tw: f64,
    pub nystrom_vs_painleve: f64,
    pub tw_vs_painleve: f64,
}

impl K0Comparison {
    pub fn max_deviation(&self) -> f64 {
        self.nystrom_vs_tw.max(self.nystrom_vs_painleve).max(self.tw_vs_painleve)
    }
}

/// Evaluates the three k = 0 routes on `grid` (Nyström rows in parallel).
pub fn compare_k0(grid: &[f64], nystrom: &NystromConfig, degree: usize) -> Result<K0Comparison, PipelineError> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return Err(PipelineError::InvalidConfig("empty s-grid".into()));
    }
    let (pain, tw) = join(|| K0Painleve::new(degree), || TwIntegral::new(degree));
    let (pain, tw) = (pain?, tw?);
    let kernel = airy_kernel();
    let rows = grid
        .par_iter()
        .map(|&s| {
            Ok(K0Row {
                s,
                f: pain.f(s)?,
                nystrom: nystrom_lndet(&kernel, s, nystrom)?,
                tw_integral: tw.lndet(s)?,
                painleve: pain.lndet(s)?,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let max_by = |f: fn(&K0Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(K0Comparison {
        nystrom_vs_tw: max_by(|r| (r.nystrom - r.tw_integral).abs()),
        nystrom_vs_painleve: max_by(|r| (r.nystrom - r.painleve).abs()),
        tw_vs_painleve: max_by(|r| (r.tw_integral - r.painleve).abs()),
        rows,
    })
}

/// Settings of the continuation sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k: usize,
    /// `t_0, ..., t_{2k-1}`.
    pub t: Vec<f64>,
    pub s_min: f64,
    pub step: f64,
    /// Collocation degree of each solve.
    pub degree: usize,
    pub max_bisections: usize,
}

impl SweepConfig {
    pub fn new(k: usize, s_min: f64) -> Self {
        SweepConfig { k, t: vec![0.0; 2 * k], s_min, step: 0.25, degree: 500, max_bisections: 6 }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.t.len() != 2 * self.k {
            return Err(MapsError::WrongParameterCount { expected: 2 * self.k, got: self.t.len() }.into());
        }
        if !(self.step > 0.0 && self.step <= 0.5) {
            return Err(PipelineError::InvalidConfig(format!("step {} outside (0, 0.5]", self.step)));
        }
        if !(self.s_min < S_PLUS - 6.0 * self.step) {
            return Err(PipelineError::InvalidConfig(format!("s_min {} must lie below {S_PLUS} by 6 steps", self.s_min)));
        }
        if self.degree < 64 {
            return Err(PipelineError::InvalidConfig("degree below 64".into()));
        }
        Ok(())
    }

    /// `s_min, s_min + h, ...` up to the first point `>= S_PLUS`.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((S_PLUS - self.s_min) / self.step - 1e-9).ceil() as usize;
        (0..=n).map(|i| self.s_min + self.step * i as f64).collect()
    }
}

/// Diagnostics and value of `F` at one `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s: f64,
    pub x: f64,
    pub tau: Vec<f64>,
    pub domain: (f64, f64),
    pub f: f64,
    /// Estimated `int_{-inf}^{x_L} u^2`, included in `f`.
    pub lower_tail: f64,
    /// Error bound on `int_{x_R}^inf (q - 1/(2 xi))`.
    pub tail_bound: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

/// A completed sweep, points in increasing `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// Samples for the constant estimators, anchored by `ln det = 0` at
    /// the last point.
    pub fn samples(&self) -> FSamples {
        FSamples { s: self.points.iter().map(|p| p.s).collect(), f: self.points.iter().map(|p| p.f).collect(), tail: 0.0 }
    }

    /// `(s, ln det(s))` with the quadrature error estimate.
    pub fn lndet(&self) -> Result<(Vec<(f64, f64)>, f64), PipelineError> {
        let smp = self.samples();
        let (cum, err) = cumulative_samples(&smp.s, &smp.f, SAMPLE_RULE_DEGREE)?;
        let total = cum.last().copied().unwrap_or(0.0);
        Ok((smp.s.iter().zip(&cum).map(|(&s, &c)| (s, -(total - c))).collect(), err))
    }
}

/// Integrates the balanced root over `[lo, hi]`; missing roots count as 0.
fn balanced_mass(parts: &HierarchyParts, lo: f64, hi: f64) -> f64 {
    let n = 48;
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * parts.largest_positive_root(lo + h * i as f64, 0.0).unwrap_or(0.0)
        })
        .sum::<f64>()
        * h
}

/// Mass of `q` to the left of the region that matters; `u` decays by
/// `exp(-mass)` across it.
const LEFT_MASS: f64 = 25.0;
/// Newton tolerance of sweep solves on domains within `|x| <= 16`.
pub const SWEEP_NEWTON_TOL: f64 = 1e-9;
/// Below this, `F` and the remaining `ln det` are treated as zero.
pub const F_NEGLIGIBLE: f64 = 1e-8;
/// Largest accepted change of the last asymptotic correction.
const BC_CHANGE_TOL: f64 = 1e-10;

/// Truncated domain for `q(.; tau)` when `Q` is needed at `x_s`.
pub fn sweep_domain(parts: &HierarchyParts, x_s: f64) -> (f64, f64) {
    let mut right = (x_s + 8.0).max(14.0);
    for _ in 0..30 {
        if parts.refined_plus(right, 4).1 <= BC_CHANGE_TOL {
            break;
        }
        right *= 1.25;
    }
    let inner = x_s.min(0.0);
    let mut left = (x_s - 8.0).min(-16.0);
    for _ in 0..30 {
        let ok_mass = balanced_mass(parts, left, inner) >= LEFT_MASS;
        let ok_bc = parts.refined_minus(left, 4).is_ok_and(|(_, c)| c <= BC_CHANGE_TOL);
        if ok_mass && ok_bc {
            break;
        }
        left *= 1.25;
    }
    (left, right)
}

fn sweep_problem(cfg: &SweepConfig, s: f64) -> Result<(PiiProblem, f64), PipelineError> {
    let n = 2 * cfg.k + 1;
    let tau = param_taus(s, cfg.k, &cfg.t)?;
    let x = param_x(s, cfg.k, &cfg.t)?;
    let parts = HierarchyParts::new(n, 0.5, &tau)?;
    let (a, b) = sweep_domain(&parts, x);
    let mut p = PiiProblem::new(n, 0.5, tau).with_domain(a, b).with_degree(cfg.degree).with_bc(BcRecipe::Refined { iterations: 4 });
    // The residual carries x q and the tau-terms, so its roundoff floor
    // grows with |x| and with |tau|.
    let tau_scale = 1.0 + p.tau.iter().map(|t| t.abs()).sum::<f64>();
    p.newton.polish = true;
    p.newton.tol = SWEEP_NEWTON_TOL * (a.abs().max(b.abs()) / 16.0).max(1.0) * tau_scale;
    Ok((p, x))
}

fn evaluate(q: &PiiSolution, s: f64, x: f64, degree: usize) -> Result<SweepPoint, PipelineError> {
    let u = ClosedFormU::new(q)?;
    let qfun = u.q_function(degree)?;
    Ok(SweepPoint {
        s,
        x,
        tau: q.problem.tau.clone(),
        domain: q.domain(),
        f: qfun.eval_with_tail(x),
        lower_tail: qfun.lower_tail,
        tail_bound: u.tail_bound,
        newton_iterations: q.solution.iterations,
        residual: q.solution.max_residual,
    })
}

/// Continues from `start` through `order` (grid indices), in that order.
fn sweep_branch(
    cfg: &SweepConfig,
    grid: &[f64],
    start: &PiiSolution,
    order: impl Iterator<Item = usize>,
    stop_when_negligible: bool,
) -> Result<Vec<SweepPoint>, PipelineError> {
    let mut current = start.clone();
    let mut out = Vec::new();
    for i in order {
        let s = grid[i];
        let step = || -> Result<(PiiSolution, SweepPoint), PipelineError> {
            let (p, x) = sweep_problem(cfg, s)?;
            let path = [PathPoint { tau: p.tau.clone(), domain: p.domain }];
            let q = continuation_solve(&p, &path, &current, cfg.max_bisections)?.remove(0);
            let point = evaluate(&q, s, x, cfg.degree)?;
            Ok((q, point))
        };
        match step() {
            Ok((q, point)) => {
                current = q;
                let done = stop_when_negligible && s > 0.0 && point.f.abs() < F_NEGLIGIBLE;
                out.push(point);
                if done {
                    break;
                }
            }
            Err(e) => return Err(PipelineError::SweepFailed { s, completed: out, source: Box::new(e) }),
        }
    }
    Ok(out)
}

/// Solves along the grid of `cfg`, starting at the grid point closest to
/// `s = 0` and continuing outward in both directions. The upward branch
/// stops early at the first `s > 0` with `|F(s)| < F_NEGLIGIBLE`.
pub fn painleve_sweep(cfg: &SweepConfig) -> Result<Sweep, PipelineError> {
    cfg.validate()?;
    let grid = cfg.grid();
    let i0 = (0..grid.len())
        .min_by(|&a, &b| grid[a].abs().total_cmp(&grid[b].abs()))
        .expect("grid is nonempty");
    let (p0, x0) = sweep_problem(cfg, grid[i0])?;
    let fail = |s: f64, e: PipelineError| PipelineError::SweepFailed { s, completed: Vec::new(), source: Box::new(e) };
    // Cold start on the default domain, then continue into the sweep domain.
    let base = PiiProblem { domain: PiiProblem::new(p0.n, 0.5, Vec::new()).domain, ..p0.clone() };
    let q0 = solve_q(&base, None)
        .and_then(|q| {
            let path = [PathPoint { tau: p0.tau.clone(), domain: p0.domain }];
            continuation_solve(&p0, &path, &q, cfg.max_bisections)
        })
        .map(|mut v| v.remove(0))
        .map_err(|e| fail(grid[i0], e.into()))?;
    let first = evaluate(&q0, grid[i0], x0, cfg.degree).map_err(|e| fail(grid[i0], e))?;
    let (down, up) = join(
        || sweep_branch(cfg, &grid, &q0, (0..i0).rev(), false),
        || sweep_branch(cfg, &grid, &q0, i0 + 1..grid.len(), true),
    );
    let merge = |mut done: Vec<SweepPoint>, err: PipelineError| match err {
        PipelineError::SweepFailed { s, completed, source } => {
            done.extend(completed);
            done.sort_by(|a, b| a.s.total_cmp(&b.s));
            PipelineError::SweepFailed { s, completed: done, source }
        }
        other => other,
    };
    let (mut down, up) = match (down, up) {
        (Ok(d), Ok(u)) => (d, u),
        (Err(e), Ok(u)) => return Err(merge([vec![first], u].concat(), e)),
        (Ok(d), Err(e)) => return Err(merge([d, vec![first]].concat(), e)),
        (Err(e), Err(_)) => return Err(merge(vec![first], e)),
    };
    down.reverse();
    down.push(first);
    down.extend(up);
    Ok(Sweep { config: cfg.clone(), points: down })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::largegap_f;

    #[test]
    fn k0_routes_agree_on_a_few_points() {
        let cmp = compare_k0(&[-6.0, -3.0, 0.0, 2.0], &NystromConfig::default(), 300).unwrap();
        assert!(cmp.max_deviation() < 1e-6, "{cmp:?}");
    }

    #[test]
    fn k0_f_is_derivative_and_tw_chain_rule() {
        let pain = K0Painleve::new(300).unwrap();
        let tw = TwIntegral::new(300).unwrap();
        let h = 1e-3;
        for &s in &[-4.0, -1.0, 1.5] {
            let fd = (pain.lndet(s + h).unwrap() - pain.lndet(s - h).unwrap()) / (2.0 * h);
            assert!((fd - pain.f(s).unwrap()).abs() < 1e-6);
            let f2 = (pain.f(s + h).unwrap() - pain.f(s - h).unwrap()) / (2.0 * h);
            assert!((f2 - tw.second_derivative(s)).abs() < 1e-4, "{s}: {f2}");
            assert!((tw.f(s).unwrap() - pain.f(s).unwrap()).abs() < 1e-8);
        }
        assert!(pain.f(-12.0).is_err());
    }

    #[test]
    fn k0_sweep_matches_single_solve() {
        let mut cfg = SweepConfig::new(0, -3.0);
        cfg.degree = 300;
        let sweep = painleve_sweep(&cfg).unwrap();
        let pain = K0Painleve::new(300).unwrap();
        let (ln, err) = sweep.lndet().unwrap();
        assert!(err < 1e-3, "{err}");
        for (p, (s, l)) in sweep.points.iter().zip(&ln) {
            assert!((p.f - pain.f(p.s).unwrap()).abs() < 1e-7, "{}", p.s);
            assert!((l - pain.lndet(*s).unwrap()).abs() < 1e-5, "{s} {} {}", l - pain.lndet(*s).unwrap(), p.f);
        }
    }

    #[test]
    fn k1_sweep_near_origin() {
        let mut cfg = SweepConfig::new(1, -2.5);
        cfg.step = 0.5;
        cfg.degree = 300;
        let sweep = painleve_sweep(&cfg).unwrap();
        let last = sweep.points.last().unwrap();
        assert!(last.f < F_NEGLIGIBLE && last.s < S_PLUS, "{last:?}");
        assert!(sweep.points.windows(2).all(|w| w[0].s < w[1].s && w[0].f >= w[1].f - 1e-12));
        let p = sweep.points.iter().find(|p| p.s == -2.5).unwrap();
        let approx = largegap_f(-2.5, 1, &[0.0, 0.0]).unwrap();
        assert!((p.f / approx - 1.0).abs() < 0.2, "{} {approx}", p.f);
    }

    #[test]
    fn sweep_config_validation() {
        let mut c = SweepConfig::new(1, -2.0);
        c.t = vec![0.0];
        assert!(matches!(painleve_sweep(&c), Err(PipelineError::Maps(_))));
        let mut c = SweepConfig::new(1, 5.0);
        c.step = 0.25;
        assert!(matches!(c.validate(), Err(PipelineError::InvalidConfig(_))));
        assert!(compare_k0(&[], &NystromConfig::default(), 100).is_err());
    }
}
