use crate::jet::Jet;

use super::coeff::{Symbol, SymbolValues};
use super::poly::DiffPoly;
use super::DiffPolyError;

#[derive(Clone, Debug)]
struct CompiledTerm {
    /// Coefficient as a polynomial in `x`: `x_poly[i]` multiplies `x^i`.
    x_poly: Vec<f64>,
    factors: Vec<(usize, i32)>,
}

/// A [`DiffPoly`] with `alpha` and `tau` fixed and all rationals converted
/// to `f64` once; `x` stays free. Evaluation order is fixed, so results are
/// deterministic.
#[derive(Clone, Debug)]
pub struct CompiledDiffPoly {
    terms: Vec<CompiledTerm>,
    max_order: Option<usize>,
}

impl CompiledDiffPoly {
    pub fn new(p: &DiffPoly, alpha: f64, tau: &[f64]) -> Result<Self, DiffPolyError> {
        let fixed = SymbolValues { x: 0.0, alpha, tau: tau.to_vec(), t: Vec::new() };
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let by_x = c.split_by(Symbol::X);
            let top = by_x.keys().copied().max().unwrap_or(0) as usize;
            let mut x_poly = vec![0.0; top + 1];
            for (e, part) in by_x {
                x_poly[e as usize] = part.eval(&fixed).ok_or(DiffPolyError::MissingSymbolValue)?;
            }
            let factors = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(d, &e)| (d, e as i32))
                .collect();
            terms.push(CompiledTerm { x_poly, factors });
        }
        Ok(CompiledDiffPoly { terms, max_order: p.max_order() })
    }

    pub fn max_order(&self) -> Option<usize> {
        self.max_order
    }

    /// Evaluates at `x` and the jet `jet[d] = q^{(d)}`. The jet must cover
    /// [`Self::max_order`].
    pub fn eval(&self, x: f64, jet: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut c = 0.0;
            for &a in t.x_poly.iter().rev() {
                c = c * x + a;
            }
            for &(d, e) in &t.factors {
                c *= if e == 1 { jet[d] } else { jet[d].powi(e) };
            }
            acc += c;
        }
        acc
    }

    /// Evaluates with every argument a truncated Taylor series; `jet[d]`
    /// is the series of `q^{(d)}`. The result has the shortest input length.
    pub fn eval_series(&self, x: &Jet, jet: &[Jet]) -> Jet {
        let len = jet.iter().map(Jet::len).chain([x.len()]).min().unwrap_or(1);
        let mut acc = Jet::constant(0.0, len);
        for t in &self.terms {
            let mut c = Jet::constant(0.0, len);
            for &a in t.x_poly.iter().rev() {
                c = (&c * x).add_scalar(a);
            }
            for &(d, e) in &t.factors {
                c = &c * &jet[d].powi(e as u32);
            }
            acc = &acc + &c;
        }
        acc.truncate(len)
    }
}

/// A hierarchy equation compiled together with its jet Jacobian, the form
/// consumed by the Newton collocation solver.
#[derive(Clone, Debug)]
pub struct CompiledEquation {
    residual: CompiledDiffPoly,
    partials: Vec<(usize, CompiledDiffPoly)>,
    order: usize,
}

impl CompiledEquation {
    pub fn new(p: &DiffPoly, alpha: f64, tau: &[f64]) -> Result<Self, DiffPolyError> {
        let residual = CompiledDiffPoly::new(p, alpha, tau)?;
        let partials = p
            .jet_jacobian()
            .iter()
            .map(|(d, dp)| Ok((*d, CompiledDiffPoly::new(dp, alpha, tau)?)))
            .collect::<Result<Vec<_>, DiffPolyError>>()?;
        Ok(CompiledEquation { residual, partials, order: p.max_order().unwrap_or(0) })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn residual(&self, x: f64, jet: &[f64]) -> f64 {
        self.residual.eval(x, jet)
    }

    /// Writes `dG/dq^{(d)}` into `out[d]` for `d = 0..=order`.
    pub fn partials(&self, x: f64, jet: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (d, p) in &self.partials {
            out[*d] = p.eval(x, jet);
        }
    }
}
