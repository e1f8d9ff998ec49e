//! Acceptance suite: one check per criterion, each printing a PASS/FAIL
//! line with the measured quantities and the elapsed time. Exits nonzero
//! if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use twh_core::diffpoly::{lenard, lenard_operator, pii_equation, rat, CoeffPoly, DiffPoly, Symbol};
use twh_core::fredholm::{airy_kernel, nystrom_lndet, NystromConfig};
use twh_core::maps::{
    chi_airy, estimate_chi1, largegap_f, largegap_f_expansion, largegap_lndet_series, param_tau_exact, param_x_exact,
    FSamples, LaurentPoly,
};
use twh_core::painleve::{backlund_residual, hastings_mcleod, solve_q, PiiProblem, PiiSolution};
use twh_core::pipeline::{compare_k0, painleve_sweep, Sweep, SweepConfig};
use twh_core::specfun::{airy_ai_pair, zeta_prime_minus_one, zeta_prime_minus_one_functional};

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn(&mut Shared) -> Check,
}

/// Expensive solutions reused across criteria; their construction time is
/// charged to the first criterion that needs them.
#[derive(Default)]
struct Shared {
    hm: Option<PiiSolution>,
    k1: Option<Result<Sweep, String>>,
}

impl Shared {
    fn hm(&mut self) -> Result<&PiiSolution, String> {
        if self.hm.is_none() {
            self.hm = Some(hastings_mcleod((-14.0, 12.0), 300).map_err(|e| e.to_string())?);
        }
        Ok(self.hm.as_ref().expect("set above"))
    }

    fn k1(&mut self) -> Result<&Sweep, String> {
        let sweep = self.k1.get_or_insert_with(|| painleve_sweep(&SweepConfig::new(1, -6.0)).map_err(|e| e.to_string()));
        sweep.as_ref().map_err(|e| e.clone())
    }
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok { Ok(detail) } else { Err(detail) }
}

fn q(d: usize) -> DiffPoly {
    DiffPoly::var(d)
}

fn c(n: i64) -> DiffPoly {
    DiffPoly::int(n)
}

fn product(factors: &[DiffPoly]) -> DiffPoly {
    factors.iter().fold(c(1), |acc, f| &acc * f)
}

fn tau(l: u8) -> DiffPoly {
    DiffPoly::symbol(Symbol::Tau(l))
}

/// The printed members, with `= xq - alpha` moved to the left.
fn printed_members() -> [DiffPoly; 3] {
    let rhs = &(&DiffPoly::symbol(Symbol::X) * &q(0)) - &DiffPoly::symbol(Symbol::Alpha);
    let p1 = &q(2) - &(&c(2) * &q(0).pow(3));
    let p2 = [
        q(4),
        &c(-10) * &product(&[q(0), q(1), q(1)]),
        &c(-10) * &product(&[q(0), q(0), q(2)]),
        &c(6) * &q(0).pow(5),
    ]
    .into_iter()
    .fold(DiffPoly::zero(), |a, b| &a + &b);
    let p3 = [
        q(6),
        &c(-14) * &product(&[q(0), q(0), q(4)]),
        &c(-56) * &product(&[q(0), q(1), q(3)]),
        &c(-70) * &product(&[q(1), q(1), q(2)]),
        &c(-42) * &product(&[q(0), q(2), q(2)]),
        &c(70) * &product(&[q(0).pow(4), q(2)]),
        &c(140) * &product(&[q(0).pow(3), q(1), q(1)]),
        &c(-20) * &q(0).pow(7),
    ]
    .into_iter()
    .fold(DiffPoly::zero(), |a, b| &a + &b);
    let g1 = &p1 - &rhs;
    let g2 = &(&p2 + &(&tau(1) * &p1)) - &rhs;
    let g3 = &(&(&p3 + &(&tau(2) * &p2)) + &(&tau(1) * &p1)) - &rhs;
    [g1, g2, g3]
}

fn c1_hierarchy_golden(_: &mut Shared) -> Check {
    let want = printed_members();
    let mut terms = Vec::new();
    for (n, w) in (1..=3).zip(&want) {
        let got = pii_equation(n).map_err(|e| e.to_string())?;
        if &got != w {
            return Err(format!("member {n} differs: {}", got.to_text("q")));
        }
        terms.push(got.len());
    }
    Ok(format!("members 1..3 equal term by term (term counts {terms:?})"))
}

fn c2_lenard_properties(_: &mut Shared) -> Check {
    for j in 0..=4 {
        let lj = lenard(j).map_err(|e| e.to_string())?;
        let next = lenard(j + 1).map_err(|e| e.to_string())?;
        if next.total_derivative() != lenard_operator(&lj) {
            return Err(format!("recursion fails at j = {j}"));
        }
        if j > 0 && !lj.substitute(&DiffPoly::zero()).is_zero() {
            return Err(format!("L_{j}[0] != 0"));
        }
    }
    let mut rng = StdRng::seed_from_u64(20240607);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let n = [1usize, 3, 5][trial % 3];
        let g = pii_equation(n).map_err(|e| e.to_string())?;
        let jet: Vec<f64> = (0..2 * n + 1).map(|_| rng.random_range(-2.0..2.0)).collect();
        let taus: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = rng.random_range(-5.0..5.0);
        for (d, dg) in g.jet_jacobian() {
            let exact = dg.eval_jet(&jet, x, 0.5, &taus).map_err(|e| e.to_string())?;
            let h = 1e-3 * jet[d].abs().max(1.0);
            let at = |k: f64| {
                let mut j = jet.clone();
                j[d] += k * h;
                g.eval_jet(&j, x, 0.5, &taus).expect("jet is long enough")
            };
            let fd = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
            worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
        }
    }
    ensure(worst <= 1e-6, format!("recursion and L_j[0] = 0 for j <= 4; Jacobian vs differences: max rel {worst:.2e}"))
}

fn shooting_q0_at_zero() -> f64 {
    let f = |x: f64, (q, p): (f64, f64)| (p, x * q + 2.0 * q * q * q);
    let (mut x, h) = (8.0, -1e-3);
    let mut y = airy_ai_pair(x).expect("x = 8 is in range");
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

fn c3_hastings_mcleod(sh: &mut Shared) -> Check {
    let q0 = sh.hm()?;
    let d0 = (q0.q(0.0) - shooting_q0_at_zero()).abs();
    let ratio = q0.q(4.0) / airy_ai_pair(4.0).map_err(|e| e.to_string())?.0;
    let x: f64 = -8.0;
    let corr = q0.q(x) / (-x / 2.0).sqrt() - 1.0;
    let rel = (corr * 8.0 * x.powi(3) - 1.0).abs();
    ensure(
        d0 <= 1e-6 && (ratio - 1.0).abs() <= 1e-4 && rel <= 0.1,
        format!("|q0(0) - shooting| = {d0:.1e}; q0(4)/Ai(4) - 1 = {:.1e}; 1/(8x^3) term off by {:.1}%", ratio - 1.0, 100.0 * rel),
    )
}

fn c4_backlund(sh: &mut Shared) -> Check {
    let q = solve_q(&PiiProblem::new(1, 0.5, Vec::new()), None).map_err(|e| e.to_string())?;
    let (worst, at) = backlund_residual(&q, sh.hm()?, (-4.0, 4.0), 400).map_err(|e| e.to_string())?;
    ensure(worst <= 1e-6, format!("max residual {worst:.2e} at x = {at:.2}"))
}

fn c5_k0_three_routes(_: &mut Shared) -> Check {
    let grid: Vec<f64> = (0..=40).map(|i| -8.0 + 0.25 * i as f64).collect();
    let cmp = compare_k0(&grid, &NystromConfig::default(), 400).map_err(|e| e.to_string())?;
    ensure(
        cmp.max_deviation() <= 1e-4,
        format!(
            "{} points; Nystrom/TW {:.1e}, Nystrom/Painleve {:.1e}, TW/Painleve {:.1e}",
            grid.len(),
            cmp.nystrom_vs_tw,
            cmp.nystrom_vs_painleve,
            cmp.tw_vs_painleve
        ),
    )
}

fn c6_airy_constant(_: &mut Shared) -> Check {
    let v = nystrom_lndet(&airy_kernel(), -10.0, &NystromConfig::default()).map_err(|e| e.to_string())?;
    let estimate = v + 1000.0 / 12.0 + 0.125 * 10f64.ln();
    let d = (estimate - chi_airy()).abs();
    let dual = (zeta_prime_minus_one() - zeta_prime_minus_one_functional()).abs();
    ensure(d <= 1e-3 && dual <= 1e-13, format!("|estimate - chi| = {d:.1e} (chi = {:.15}); zeta'(-1) schemes differ by {dual:.1e}", chi_airy()))
}

fn c7_third_member(_: &mut Shared) -> Check {
    let base = PiiProblem::new(3, 0.5, vec![0.0, 0.0]);
    let q = solve_q(&base, None).map_err(|e| e.to_string())?;
    let plus = 2.0 * 8.0 * q.q(8.0);
    let minus = q.q(-9.0) / (9.0f64 / 20.0).powf(1.0 / 6.0);
    let wide = base.clone().with_domain(-16.0, 18.0).with_degree(520);
    let q_wide = solve_q(&wide, Some(&q.solution)).map_err(|e| e.to_string())?;
    let ext = (0..=240).map(|i| -6.0 + 0.05 * i as f64).map(|x| (q.q(x) - q_wide.q(x)).abs()).fold(0.0, f64::max);
    let res = q.solution.max_residual;
    ensure(
        (plus - 1.0).abs() <= 0.02 && (minus - 1.0).abs() <= 0.05 && res <= 1e-10 && ext <= 1e-6,
        format!("2x q(8) = {plus:.5}; q(-9)/(9/20)^(1/6) = {minus:.5}; residual {res:.1e}; domain extension {ext:.1e}"),
    )
}

/// Relative deviations below this are at the solver's accuracy.
const K1_NOISE_FLOOR: f64 = 2e-8;

fn c8_k1_asymptotic_match(sh: &mut Shared) -> Check {
    let sweep = sh.k1()?;
    let mut devs = Vec::new();
    for p in sweep.points.iter().filter(|p| p.s <= -2.0) {
        let lg = largegap_f(p.s, 1, &[0.0, 0.0]).map_err(|e| e.to_string())?;
        devs.push((p.s, (p.f / lg - 1.0).abs()));
    }
    let at = |s: f64| devs.iter().find(|d| d.0 == s).map(|d| d.1).ok_or(format!("sweep misses s = {s}"));
    let (d5, d6) = (at(-5.0)?, at(-6.0)?);
    // devs runs from s = -6 upward: the deviation must grow toward s = -2
    // until it has risen above the noise floor.
    let monotone = devs.windows(2).all(|w| w[1].1 + K1_NOISE_FLOOR >= w[0].1);
    ensure(
        d5 <= 0.02 && d6 <= 0.01 && monotone,
        format!(
            "rel dev {d5:.1e} at s=-5, {d6:.1e} at s=-6, {:.1e} at s=-2; decreasing in |s| down to the {K1_NOISE_FLOOR:.0e} floor: {monotone}",
            at(-2.0)?
        ),
    )
}

fn synthetic(chi: f64) -> FSamples {
    let series = largegap_lndet_series(1);
    let deriv = series.derivative();
    let s: Vec<f64> = (0..=120).map(|i| -8.0 + 0.05 * i as f64).collect();
    let f = s.iter().map(|&v| deriv.eval(v.abs(), &[0.0, 0.0])).collect();
    let tail = -series.eval(-2.0, &[0.0, 0.0], chi);
    FSamples { s, f, tail }
}

fn c9_chi1(sh: &mut Shared) -> Check {
    let mut round_trip: f64 = 0.0;
    for chi in [0.0, 0.25] {
        let e = estimate_chi1(&synthetic(chi)).map_err(|e| e.to_string())?;
        round_trip = round_trip.max((e.estimate - chi).abs());
    }
    let est = estimate_chi1(&sh.k1()?.samples()).map_err(|e| e.to_string())?;
    let seq: Vec<String> = est.sequence.iter().map(|(s, v)| format!("{s}: {v:.6}")).collect();
    ensure(
        round_trip <= 1e-6 && est.uncertainty <= 5e-2,
        format!(
            "synthetic error {round_trip:.1e}; estimates [{}], spread {:.1e}, quadrature error {:.1e}",
            seq.join(", "),
            est.uncertainty,
            est.quadrature_error
        ),
    )
}

fn c10_exact_maps(_: &mut Shared) -> Check {
    let zero = [rat(0, 1), rat(0, 1)];
    let cases = [
        ("x", param_x_exact(1).at_t(&zero), rat(5, 7) - rat(3, 1), 3, -5),
        ("tau_1", param_tau_exact(1, 1).map_err(|e| e.to_string())?.at_t(&zero), rat(1, 7) - rat(2, 1), 2, 15),
        ("tau_2", param_tau_exact(2, 1).map_err(|e| e.to_string())?.at_t(&zero), rat(-3, 7), 1, 5),
    ];
    for (name, got, two, power, coeff) in cases {
        let want = LaurentPoly::monomial(power, CoeffPoly::constant(BigRational::from_integer(coeff.into())));
        if got.two_exponent != two || got.poly != want {
            return Err(format!("{name}: 2^({}) * {:?}", got.two_exponent, got.poly));
        }
    }
    let t = |j: u8| CoeffPoly::symbol(Symbol::T(j));
    let line = largegap_f_expansion(1);
    let want = [
        (6, CoeffPoly::constant(rat(25, 256))),
        (4, t(1).scale(&rat(5, 16))),
        (3, t(0).scale(&rat(5, 8))),
        (2, (&t(1) * &t(1)).scale(&rat(1, 4))),
        (1, &t(0) * &t(1)),
        (0, &t(0) * &t(0)),
        (-1, CoeffPoly::constant(rat(3, 8))),
    ];
    for (p, w) in &want {
        if &line.coefficient(*p) != w {
            return Err(format!("derivative line coefficient of |s|^{p} differs"));
        }
    }
    let extra = line.terms.keys().filter(|p| **p >= -1 && !want.iter().any(|w| w.0 == **p)).count();
    ensure(extra == 0, "x, tau_1, tau_2 exact; seven derivative-line coefficients exact".into())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "hierarchy golden members", limit: Duration::from_secs(1), run: c1_hierarchy_golden },
        Criterion { id: 2, name: "Lenard properties", limit: Duration::from_secs(10), run: c2_lenard_properties },
        Criterion { id: 3, name: "Hastings-McLeod", limit: Duration::from_secs(30), run: c3_hastings_mcleod },
        Criterion { id: 4, name: "Backlund identity", limit: Duration::from_secs(30), run: c4_backlund },
        Criterion { id: 5, name: "k=0 three-route consistency", limit: Duration::from_secs(180), run: c5_k0_three_routes },
        Criterion { id: 6, name: "Airy large-gap constant", limit: Duration::from_secs(60), run: c6_airy_constant },
        Criterion { id: 7, name: "third member asymptotics", limit: Duration::from_secs(120), run: c7_third_member },
        Criterion { id: 8, name: "k=1 asymptotic match", limit: Duration::from_secs(600), run: c8_k1_asymptotic_match },
        Criterion { id: 9, name: "chi^(1) estimator", limit: Duration::from_secs(600), run: c9_chi1 },
        Criterion { id: 10, name: "exact parameter maps", limit: Duration::from_secs(1), run: c10_exact_maps },
    ];
    let mut shared = Shared::default();
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)(&mut shared);
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let (tag, detail) = match (&outcome, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {:?} limit", c.limit)),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} [{tag}] {} ({:.2}s): {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
