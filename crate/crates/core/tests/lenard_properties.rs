use proptest::prelude::*;
use twh_core::diffpoly::{lenard, lenard_operator, pii_equation, CompiledEquation, DiffPoly};

#[test]
fn recursion_identity_and_zero_argument() {
    for j in 0..=4 {
        let lj = lenard(j).unwrap();
        let next = lenard(j + 1).unwrap();
        assert_eq!(next.total_derivative(), lenard_operator(&lj), "j = {j}");
        let at_zero = lj.substitute(&DiffPoly::zero());
        if j == 0 {
            assert_eq!(at_zero, lj);
        } else {
            assert!(at_zero.is_zero(), "L_{j}[0] = {}", at_zero.to_text("f"));
        }
    }
}

fn jet_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, len)
}

fn taus(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, n - 1)
}

fn member() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64)> {
    prop::sample::select(vec![1usize, 3, 5]).prop_flat_map(|n| (Just(n), jet_strategy(2 * n + 2), taus(n), -5.0..5.0f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jacobian_matches_finite_differences((n, jet, tau, x) in member()) {
        let g = pii_equation(n).unwrap();
        for (d, dg) in g.jet_jacobian() {
            let exact = dg.eval_jet(&jet, x, 0.5, &tau).unwrap();
            // fourth-order central difference
            let h = 1e-3 * jet[d].abs().max(1.0);
            let at = |k: f64| {
                let mut j = jet.clone();
                j[d] += k * h;
                g.eval_jet(&j, x, 0.5, &tau).unwrap()
            };
            let fd = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "n={} d={} fd={} exact={}", n, d, fd, exact);
        }
    }

    #[test]
    fn total_derivative_is_the_chain_rule((n, jet, tau, x) in member()) {
        let g = pii_equation(n).unwrap();
        let dg = g.total_derivative();
        let mut want = -jet[0]; // d/dx of the explicit -x q term
        for (d, p) in g.jet_jacobian() {
            want += p.eval_jet(&jet, x, 0.5, &tau).unwrap() * jet[d + 1];
        }
        let got = dg.eval_jet(&jet, x, 0.5, &tau).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{} {}", got, want);
    }

    #[test]
    fn compiled_form_agrees_with_exact_evaluation((n, jet, tau, x) in member()) {
        let g = pii_equation(n).unwrap();
        let eq = CompiledEquation::new(&g, 0.5, &tau).unwrap();
        let exact = g.eval_jet(&jet, x, 0.5, &tau).unwrap();
        prop_assert!((eq.residual(x, &jet) - exact).abs() <= 1e-11 * exact.abs().max(1.0));
        let mut partials = vec![0.0; eq.order() + 1];
        eq.partials(x, &jet, &mut partials);
        for (d, dg) in g.jet_jacobian() {
            let want = dg.eval_jet(&jet, x, 0.5, &tau).unwrap();
            prop_assert!((partials[d] - want).abs() <= 1e-11 * want.abs().max(1.0));
        }
    }

    #[test]
    fn total_derivative_is_linear(a in -3i64..3, b in -3i64..3, i in 0usize..4, j in 0usize..4) {
        let (p, q) = (lenard(i).unwrap(), lenard(j).unwrap());
        let combo = &DiffPoly::int(a) * &p + &DiffPoly::int(b) * &q;
        let want = &DiffPoly::int(a) * &p.total_derivative() + &DiffPoly::int(b) * &q.total_derivative();
        prop_assert_eq!(combo.total_derivative(), want);
    }
}
