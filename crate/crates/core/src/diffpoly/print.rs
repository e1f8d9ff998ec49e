//! Plain-text and LaTeX rendering of differential polynomials and of the
//! hierarchy equations in the `lhs = xq - alpha` form.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed};

use super::coeff::{fmt_rational, CoeffPoly, Symbol, SymbolMonomial};
use super::poly::{DiffPoly, JetMonomial};
use super::{pii_equation, DiffPolyError};

/// Display order: polynomial degree, then exponent vectors read from the
/// highest derivative down.
fn display_order(a: &JetMonomial, b: &JetMonomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        let n = a.exps().len().max(b.exps().len());
        (0..n)
            .rev()
            .map(|d| a.power(d).cmp(&b.power(d)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn jet_factor(var: &str, d: usize, e: u32, latex: bool) -> String {
    let base = match (d, latex) {
        (0, _) => var.to_string(),
        (1, _) => format!("{var}_x"),
        (2, false) => format!("{var}_xx"),
        (3, false) => format!("{var}_xxx"),
        (2, true) => format!("{var}_{{xx}}"),
        (_, false) => format!("{var}_x^({d})"),
        (_, true) => format!("{var}_{{x}}^{{({d})}}"),
    };
    if e == 1 {
        return base;
    }
    let exp = if latex && e > 9 { format!("^{{{e}}}") } else { format!("^{e}") };
    if d <= 1 {
        format!("{base}{exp}")
    } else {
        format!("({base}){exp}")
    }
}

fn jet_monomial(var: &str, m: &JetMonomial, latex: bool) -> String {
    m.exps()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(d, &e)| jet_factor(var, d, e, latex))
        .collect()
}

fn symbol_monomial(m: &SymbolMonomial, latex: bool) -> String {
    if m.is_one() {
        return String::new();
    }
    let p = CoeffPoly::term(m.clone(), num_rational::BigRational::one());
    if latex {
        p.to_latex()
    } else {
        p.to_text()
    }
}

fn render_terms(terms: Vec<(&JetMonomial, &CoeffPoly)>, var: &str, latex: bool) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let body = jet_monomial(var, m, latex);
        let (neg, coef) = if c.len() == 1 {
            let (sm, r) = c.terms().next().expect("one term");
            let mut s = String::new();
            let a = r.abs();
            if !a.is_one() || (sm.is_one() && body.is_empty()) {
                s.push_str(&fmt_rational(&a, latex));
            }
            s.push_str(&symbol_monomial(sm, latex));
            (r.is_negative(), s)
        } else {
            let inner = if latex { c.to_latex() } else { c.to_text() };
            (false, if body.is_empty() { inner } else { format!("({inner})") })
        };
        match (i, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&coef);
        out.push_str(&body);
    }
    out
}

pub(super) fn render(p: &DiffPoly, var: &str, latex: bool) -> String {
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by(|a, b| display_order(a.0, b.0));
    render_terms(terms, var, latex)
}

fn equation(n: usize, latex: bool) -> Result<String, DiffPolyError> {
    let g = pii_equation(n)?;
    let explicit = |c: &CoeffPoly| c.contains(Symbol::X) || c.contains(Symbol::Alpha);
    let rhs = -&g.filter_coefficients(explicit);
    let lhs = g.filter_coefficients(|c| !explicit(c));

    // Group the left side by its tau-monomial.
    let mut groups: BTreeMap<SymbolMonomial, DiffPoly> = BTreeMap::new();
    for (m, c) in lhs.terms() {
        for (sm, r) in c.terms() {
            groups
                .entry(sm.clone())
                .or_default()
                .add_term(m.clone(), CoeffPoly::constant(r.clone()));
        }
    }
    let top = groups.remove(&SymbolMonomial::one()).unwrap_or_default();
    let mut out = String::new();
    if groups.is_empty() {
        out.push_str(&render(&top, "q", latex));
    } else {
        out.push('(');
        out.push_str(&render(&top, "q", latex));
        out.push(')');
        for (sm, body) in groups.iter().rev() {
            out.push_str(" + ");
            out.push_str(&symbol_monomial(sm, latex));
            out.push('(');
            out.push_str(&render(body, "q", latex));
            out.push(')');
        }
    }
    let mut rterms: Vec<_> = rhs.terms().collect();
    rterms.sort_by(|a, b| display_order(b.0, a.0));
    out.push_str(" = ");
    out.push_str(&render_terms(rterms, "q", latex));
    Ok(out)
}

/// The `n`-th hierarchy equation as plain text, e.g. `q_xx - 2q^3 = xq - alpha`.
pub fn equation_text(n: usize) -> Result<String, DiffPolyError> {
    equation(n, false)
}

/// The `n`-th hierarchy equation in LaTeX.
pub fn equation_latex(n: usize) -> Result<String, DiffPolyError> {
    equation(n, true)
}
