//! Integral-form Chebyshev collocation with damped Newton.
//!
//! For an equation of order `m` the unknowns are the values `w_j` of the
//! top derivative `y^{(m)}` at the `N + 1` mapped Lobatto points together
//! with the left-end jet `c_l = y^{(l)}(a)`, `l < m`. Lower derivatives are
//! recovered by spectral integration,
//!
//! ```text
//! y^{(l)}(x) = sum_{i < m-l} c_{l+i} (x-a)^i / i! + (I^{m-l} w)(x),
//! ```
//!
//! which keeps the linear systems well conditioned where differentiation
//! matrices of order six would not be.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cheb::{integrate_coeffs, integration_matrix, mapped_points, values_to_coeffs, ChebSeries};

use super::PainleveError;

/// A scalar ODE `G(x, y, y', ..., y^{(m)}) = 0` with its jet Jacobian.
pub trait CollocEquation {
    fn order(&self) -> usize;
    fn residual(&self, x: f64, jet: &[f64]) -> f64;
    /// Writes `dG/dy^{(d)}` into `out[d]`, `d = 0..=order`.
    fn partials(&self, x: f64, jet: &[f64], out: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// `y^{(derivative)}(endpoint) = value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub side: Side,
    pub derivative: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    /// Keep iterating past `tol` until the residual stops halving.
    pub polish: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 60, max_backtracks: 30, polish: false }
    }
}

/// Starting point: top-derivative values at the nodes and the left jet.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    pub top: Vec<f64>,
    pub left_jet: Vec<f64>,
}

/// A converged collocation solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollocSolution {
    /// `derivs[l]` represents `y^{(l)}` for `l = 0..=order`.
    pub derivs: Vec<ChebSeries>,
    pub degree: usize,
    pub iterations: usize,
    /// Max-norm residual before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    pub max_residual: f64,
}

impl CollocSolution {
    pub fn domain(&self) -> (f64, f64) {
        (self.derivs[0].a, self.derivs[0].b)
    }

    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn contains(&self, x: f64) -> bool {
        self.derivs[0].contains(x)
    }

    /// `y^{(l)}(x)`; `x` must lie in the domain.
    pub fn eval(&self, l: usize, x: f64) -> f64 {
        debug_assert!(self.contains(x), "{x} outside {:?}", self.domain());
        self.derivs[l].eval(x)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(0, x)
    }

    /// `(y, y', ..., y^{(upto)})` at `x`.
    pub fn jet(&self, x: f64, upto: usize) -> Vec<f64> {
        (0..=upto).map(|l| self.eval(l, x)).collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let (a, b) = self.domain();
        mapped_points(a, b, self.degree)
    }

    /// Max residual of `eq` over `count + 1` equispaced points.
    pub fn residual_on_grid<E: CollocEquation + ?Sized>(&self, eq: &E, count: usize) -> f64 {
        let (a, b) = self.domain();
        (0..=count)
            .map(|i| {
                let x = a + (b - a) * i as f64 / count as f64;
                eq.residual(x, &self.jet(x, self.order())).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Initial state for a new solve on `[a, b]` with `degree`, seeded from
    /// this solution. Outside the old domain the top derivative is frozen
    /// at its endpoint value and the left jet is Taylor-extrapolated.
    pub fn seed(&self, a: f64, b: f64, degree: usize) -> InitialState {
        let (oa, ob) = self.domain();
        let m = self.order();
        let top = mapped_points(a, b, degree)
            .into_iter()
            .map(|x| self.eval(m, x.clamp(oa, ob)))
            .collect();
        let left_jet = if a >= oa {
            (0..m).map(|l| self.eval(l, a)).collect()
        } else {
            let h = a - oa;
            let base = self.jet(oa, m);
            (0..m)
                .map(|l| {
                    let mut fact = 1.0;
                    let mut acc = 0.0;
                    for (i, v) in base[l..].iter().enumerate() {
                        if i > 0 {
                            fact *= i as f64;
                        }
                        acc += v * h.powi(i as i32) / fact;
                    }
                    acc
                })
                .collect()
        };
        InitialState { top, left_jet }
    }
}

/// Initial state from a function returning the jet `(g, ..., g^{(m)})`.
pub fn initial_from_jets(a: f64, b: f64, degree: usize, order: usize, mut g: impl FnMut(f64) -> Vec<f64>) -> InitialState {
    let top = mapped_points(a, b, degree).into_iter().map(|x| g(x)[order]).collect();
    let left_jet = g(a)[..order].to_vec();
    InitialState { top, left_jet }
}

struct Layout {
    a: f64,
    b: f64,
    n: usize,
    m: usize,
    xs: Vec<f64>,
    /// `h^{m-l} I^{m-l}` on node values, for `l = 0..m`.
    integ: Vec<DMatrix<f64>>,
    /// `(x_j - a)^i / i!` for `i < m`.
    poly: Vec<Vec<f64>>,
}

impl Layout {
    fn new(a: f64, b: f64, n: usize, m: usize) -> Self {
        let h = (b - a) / 2.0;
        let xs = mapped_points(a, b, n);
        let integ = (0..m)
            .map(|l| {
                let p = m - l;
                (*integration_matrix(n, p)).clone() * h.powi(p as i32)
            })
            .collect();
        let poly = xs
            .iter()
            .map(|&x| {
                let mut row = vec![1.0; m.max(1)];
                for i in 1..m {
                    row[i] = row[i - 1] * (x - a) / i as f64;
                }
                row
            })
            .collect();
        Layout { a, b, n, m, xs, integ, poly }
    }

    fn unknowns(&self) -> usize {
        self.n + 1 + self.m
    }

    /// Node values of every derivative order, `vals[l][j]`.
    fn derivatives(&self, z: &DVector<f64>) -> Vec<Vec<f64>> {
        let np = self.n + 1;
        let w = z.rows(0, np);
        let c = z.rows(np, self.m);
        let mut vals = Vec::with_capacity(self.m + 1);
        for l in 0..self.m {
            let iw = &self.integ[l] * w;
            let v = (0..np)
                .map(|j| iw[j] + (0..self.m - l).map(|i| c[l + i] * self.poly[j][i]).sum::<f64>())
                .collect();
            vals.push(v);
        }
        vals.push(w.iter().copied().collect());
        vals
    }

    fn residual<E: CollocEquation + ?Sized>(&self, eq: &E, bcs: &[BoundaryCondition], z: &DVector<f64>) -> DVector<f64> {
        let vals = self.derivatives(z);
        let np = self.n + 1;
        let mut r = DVector::zeros(self.unknowns());
        let mut jet = vec![0.0; self.m + 1];
        for j in 0..np {
            for l in 0..=self.m {
                jet[l] = vals[l][j];
            }
            r[j] = eq.residual(self.xs[j], &jet);
        }
        for (k, bc) in bcs.iter().enumerate() {
            let node = match bc.side {
                Side::Left => 0,
                Side::Right => self.n,
            };
            r[np + k] = vals[bc.derivative][node] - bc.value;
        }
        r
    }

    fn jacobian<E: CollocEquation + ?Sized>(&self, eq: &E, bcs: &[BoundaryCondition], z: &DVector<f64>) -> DMatrix<f64> {
        let vals = self.derivatives(z);
        let np = self.n + 1;
        let nu = self.unknowns();
        let mut jac = DMatrix::zeros(nu, nu);
        let mut jet = vec![0.0; self.m + 1];
        let mut parts = vec![0.0; self.m + 1];
        for j in 0..np {
            for l in 0..=self.m {
                jet[l] = vals[l][j];
            }
            eq.partials(self.xs[j], &jet, &mut parts);
            jac[(j, j)] += parts[self.m];
            for l in 0..self.m {
                let p = parts[l];
                if p == 0.0 {
                    continue;
                }
                let row = self.integ[l].row(j);
                for col in 0..np {
                    jac[(j, col)] += p * row[col];
                }
                for i in 0..self.m - l {
                    jac[(j, np + l + i)] += p * self.poly[j][i];
                }
            }
        }
        for (k, bc) in bcs.iter().enumerate() {
            let r = np + k;
            let l = bc.derivative;
            let node = match bc.side {
                Side::Left => 0,
                Side::Right => self.n,
            };
            if l == self.m {
                jac[(r, node)] = 1.0;
                continue;
            }
            let row = self.integ[l].row(node);
            for col in 0..np {
                jac[(r, col)] = row[col];
            }
            for i in 0..self.m - l {
                jac[(r, np + l + i)] = self.poly[node][i];
            }
        }
        jac
    }

    fn solution(&self, z: &DVector<f64>) -> Vec<ChebSeries> {
        let np = self.n + 1;
        let h = (self.b - self.a) / 2.0;
        let top = values_to_coeffs(&z.as_slice()[..np]);
        let mut out = vec![ChebSeries::new(self.a, self.b, top.clone())];
        let mut coeffs = top;
        // y^{(l)} = c_l + int_a^x y^{(l+1)}
        for l in (0..self.m).rev() {
            coeffs = integrate_coeffs(&coeffs).into_iter().map(|v| v * h).collect();
            coeffs[0] += z[np + l];
            out.push(ChebSeries::new(self.a, self.b, coeffs.clone()));
        }
        out.reverse();
        out
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `eq` on `[a, b]` with `degree + 1` collocation points.
pub fn solve<E: CollocEquation + ?Sized>(
    eq: &E,
    a: f64,
    b: f64,
    degree: usize,
    bcs: &[BoundaryCondition],
    init: &InitialState,
    opts: &NewtonOptions,
) -> Result<CollocSolution, PainleveError> {
    let m = eq.order();
    if bcs.len() != m {
        return Err(PainleveError::InvalidProblem(format!("{} boundary conditions for order {m}", bcs.len())));
    }
    if init.top.len() != degree + 1 || init.left_jet.len() != m {
        return Err(PainleveError::InvalidProblem("initial state does not match the discretization".into()));
    }
    let lay = Layout::new(a, b, degree, m);
    let mut z = DVector::from_iterator(lay.unknowns(), init.top.iter().chain(&init.left_jet).copied());
    let mut r = lay.residual(eq, bcs, &z);
    let mut history = vec![max_abs(&r)];
    for iter in 0..opts.max_iter {
        if !history.last().is_some_and(|v| v.is_finite()) {
            return Err(PainleveError::NewtonDiverged { residual: f64::NAN });
        }
        let now = *history.last().expect("nonempty");
        if now <= opts.tol {
            let stalled = history.len() >= 2 && now > 0.5 * history[history.len() - 2];
            if !opts.polish || stalled || now == 0.0 {
                return Ok(finish(&lay, &z, iter, history));
            }
        }
        let mut jac = lay.jacobian(eq, bcs, &z);
        let mut rhs = -r.clone();
        for i in 0..jac.nrows() {
            let s = jac.row(i).iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            if s > 0.0 {
                jac.row_mut(i).scale_mut(1.0 / s);
                rhs[i] /= s;
            }
        }
        let mut colscale = vec![1.0; jac.ncols()];
        for (j, cs) in colscale.iter_mut().enumerate() {
            let s = jac.column(j).iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            if s > 0.0 {
                *cs = 1.0 / s;
                jac.column_mut(j).scale_mut(*cs);
            }
        }
        let mut step = jac.lu().solve(&rhs).ok_or(PainleveError::SingularJacobian)?;
        for (j, cs) in colscale.iter().enumerate() {
            step[j] *= cs;
        }
        let norm0 = r.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_backtracks {
            let trial = &z + &step * lambda;
            let rt = lay.residual(eq, bcs, &trial);
            let nt = rt.norm();
            if nt.is_finite() && nt <= (1.0 - 1e-4 * lambda) * norm0 {
                z = trial;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            let last = *history.last().expect("nonempty");
            if last <= opts.tol {
                return Ok(finish(&lay, &z, iter, history));
            }
            // Rounding floor reached: no descent possible but already tiny.
            if last <= opts.tol * 10.0 {
                return Err(PainleveError::ResidualAboveTolerance { residual: last, tol: opts.tol });
            }
            return Err(PainleveError::NewtonDiverged { residual: last });
        }
        history.push(max_abs(&r));
    }
    let last = *history.last().expect("nonempty");
    if last <= opts.tol {
        Ok(finish(&lay, &z, opts.max_iter, history))
    } else {
        Err(PainleveError::ResidualAboveTolerance { residual: last, tol: opts.tol })
    }
}

fn finish(lay: &Layout, z: &DVector<f64>, iterations: usize, residual_history: Vec<f64>) -> CollocSolution {
    let max_residual = *residual_history.last().expect("nonempty");
    CollocSolution {
        derivs: lay.solution(z),
        degree: lay.n,
        iterations,
        residual_history,
        max_residual,
    }
}
