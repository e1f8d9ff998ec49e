use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use twh_core::diffpoly::{equation_latex, equation_text, MAX_HIERARCHY_ORDER};
use twh_core::fredholm::{airy_kernel, nystrom_lndet, NystromConfig, S_MIN};
use twh_core::maps::{chi_airy, estimate_chi1, largegap_f, largegap_lndet_series, FSamples};
use twh_core::pipeline::{painleve_sweep, K0Painleve, TwIntegral, PipelineError, SweepConfig, SweepPoint, F_NEGLIGIBLE, S_PLUS};
use twh_core::specfun::zeta_prime_minus_one;

use crate::config::{deformation, grid_points, CompareArgs, ConstantsArgs, Format, GridArgs, Method, PiiPrintArgs, TwArgs};
use crate::output::{emit, render_report, render_table, Failure, Row, Table};
use crate::CliError;

/// Lowest `s` of the single-solve k = 0 Painlevé route.
const K0_PAINLEVE_S_MIN: f64 = -11.0;
/// Range of the Tracy–Widom integral route (its Hastings–McLeod domain).
const TW_S_RANGE: (f64, f64) = (-14.0, 12.0);
/// Step of the difference quotient for `F` on the Nyström route.
const FD_STEP: f64 = 1e-3;

pub fn pii_print(args: &PiiPrintArgs) -> Result<(), CliError> {
    if args.n == 0 || args.n > MAX_HIERARCHY_ORDER {
        return Err(CliError::Usage(format!("n = {} outside 1..={MAX_HIERARCHY_ORDER}", args.n)));
    }
    let text = if args.latex { equation_latex(args.n) } else { equation_text(args.n) };
    println!("{}", text.map_err(|e| CliError::Internal(e.to_string()))?);
    Ok(())
}

/// Checks that `method` can serve `g`.
fn check_route(method: Method, g: &GridArgs, grid: &[f64]) -> Result<(), CliError> {
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    match method {
        Method::Fredholm if g.k != 0 => {
            Err(CliError::Usage(format!("route unavailable: fredholm serves k = 0 only (k = {})", g.k)))
        }
        Method::TwIntegral if g.k != 0 => {
            Err(CliError::Usage(format!("route unavailable: tw-integral serves k = 0 only (k = {})", g.k)))
        }
        Method::TwIntegral if lo < TW_S_RANGE.0 || hi > TW_S_RANGE.1 => Err(CliError::Usage(format!(
            "tw-integral covers s in [{}, {}], got [{lo}, {hi}]",
            TW_S_RANGE.0, TW_S_RANGE.1
        ))),
        Method::Fredholm if lo < S_MIN => Err(CliError::Usage(format!("fredholm needs s >= {S_MIN}, got {lo}"))),
        Method::Painleve if g.k == 0 && (lo < K0_PAINLEVE_S_MIN || hi > S_PLUS) => Err(CliError::Usage(format!(
            "painleve with k = 0 covers s in [{K0_PAINLEVE_S_MIN}, {S_PLUS}], got [{lo}, {hi}]"
        ))),
        Method::Painleve if g.k > 0 && hi > S_PLUS => {
            Err(CliError::Usage(format!("painleve covers s <= {S_PLUS}, got {hi}")))
        }
        Method::Asymptotic if hi >= 0.0 => Err(CliError::Usage(format!("asymptotic route needs s < 0, got {hi}"))),
        _ => Ok(()),
    }
}

fn nystrom_cfg(g: &GridArgs) -> Result<NystromConfig, CliError> {
    let cfg = NystromConfig { m: g.m, l: g.l };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn fredholm_table(g: &GridArgs, grid: &[f64]) -> Result<Table, CliError> {
    let cfg = nystrom_cfg(g)?;
    let kernel = airy_kernel();
    let rows: Result<Vec<Row>, _> = grid
        .par_iter()
        .map(|&s| {
            let at = |v: f64| nystrom_lndet(&kernel, v, &cfg);
            let lndet = at(s)?;
            let h = FD_STEP;
            let f = if s - 2.0 * h >= S_MIN {
                (8.0 * (at(s + h)? - at(s - h)?) - (at(s + 2.0 * h)? - at(s - 2.0 * h)?)) / (12.0 * h)
            } else {
                (-3.0 * lndet + 4.0 * at(s + h)? - at(s + 2.0 * h)?) / (2.0 * h)
            };
            Ok::<Row, twh_core::fredholm::FredholmError>(Row { s, f: Some(f), lndet: Some(lndet) })
        })
        .collect();
    let rows = rows.map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(Table {
        rows,
        metadata: json!({ "method": "fredholm", "k": 0, "m": cfg.m, "l": cfg.l, "F": "difference quotient of lndet" }),
        failure: None,
    })
}

fn k0_painleve_table(g: &GridArgs, grid: &[f64]) -> Result<Table, CliError> {
    let route = K0Painleve::new(g.degree).map_err(pipeline_error)?;
    let rows = grid
        .iter()
        .map(|&s| Ok(Row { s, f: Some(route.f(s)?), lndet: Some(route.lndet(s)?) }))
        .collect::<Result<Vec<_>, PipelineError>>()
        .map_err(pipeline_error)?;
    Ok(Table {
        rows,
        metadata: json!({
            "method": "painleve",
            "k": 0,
            "degree": g.degree,
            "anchor": S_PLUS,
            "residual": route.q.solution.max_residual,
            "tail_bound": route.u.tail_bound,
        }),
        failure: None,
    })
}

fn tw_integral_table(g: &GridArgs, grid: &[f64]) -> Result<Table, CliError> {
    let route = TwIntegral::new(g.degree).map_err(pipeline_error)?;
    let rows = grid
        .iter()
        .map(|&s| Ok(Row { s, f: Some(route.f(s)?), lndet: Some(route.lndet(s)?) }))
        .collect::<Result<Vec<_>, PipelineError>>()
        .map_err(pipeline_error)?;
    Ok(Table {
        rows,
        metadata: json!({ "method": "tw-integral", "k": 0, "degree": g.degree, "residual": route.q0.solution.max_residual }),
        failure: None,
    })
}

fn sweep_metadata(points: &[SweepPoint], quadrature_error: Option<f64>, cfg: &SweepConfig) -> Value {
    let max = |f: fn(&SweepPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    json!({
        "method": "painleve",
        "k": cfg.k,
        "t": cfg.t,
        "degree": cfg.degree,
        "anchor": points.last().map(|p| p.s),
        "negligible_f": F_NEGLIGIBLE,
        "quadrature_error": quadrature_error,
        "max_residual": max(|p| p.residual),
        "max_tail_bound": max(|p| p.tail_bound),
        "max_lower_tail": max(|p| p.lower_tail),
    })
}

fn sweep_config(g: &GridArgs, t: Vec<f64>) -> SweepConfig {
    let mut cfg = SweepConfig::new(g.k, g.s_from);
    cfg.t = t;
    cfg.step = g.s_step;
    cfg.degree = g.degree;
    cfg
}

/// The continuation sweep for any k. It always runs up to the anchor;
/// grid points past an early stop (`F < F_NEGLIGIBLE`) report zero.
fn sweep_table(g: &GridArgs, grid: &[f64], t: Vec<f64>) -> Result<Table, CliError> {
    let cfg = sweep_config(g, t);
    cfg.validate().map_err(pipeline_error)?;
    let pick = |points: &[SweepPoint], lndet: Option<&[(f64, f64)]>| -> Vec<Row> {
        grid.iter()
            .filter_map(|&s| {
                let i = points.iter().position(|p| (p.s - s).abs() < 1e-9);
                match i {
                    Some(i) => Some(Row { s, f: Some(points[i].f), lndet: lndet.map(|l| l[i].1) }),
                    None if points.last().is_some_and(|p| p.s < s) && lndet.is_some() => {
                        Some(Row { s, f: Some(0.0), lndet: Some(0.0) })
                    }
                    None => None,
                }
            })
            .collect()
    };
    match painleve_sweep(&cfg) {
        Ok(sweep) => {
            let (lndet, err) = sweep.lndet().map_err(pipeline_error)?;
            Ok(Table { rows: pick(&sweep.points, Some(&lndet)), metadata: sweep_metadata(&sweep.points, Some(err), &cfg), failure: None })
        }
        Err(PipelineError::SweepFailed { s, completed, source }) => Ok(Table {
            rows: pick(&completed, None),
            metadata: sweep_metadata(&completed, None, &cfg),
            failure: Some(Failure { s, message: source.to_string() }),
        }),
        Err(e) => Err(pipeline_error(e)),
    }
}

fn asymptotic_table(g: &GridArgs, grid: &[f64], t: &[f64]) -> Result<Table, CliError> {
    let series = largegap_lndet_series(g.k);
    let chi = (g.k == 0).then(chi_airy);
    let rows = grid
        .iter()
        .map(|&s| {
            let f = largegap_f(s, g.k, t).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Row { s, f: Some(f), lndet: Some(series.eval(s, t, chi.unwrap_or(0.0))) })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Table {
        rows,
        metadata: json!({
            "method": "asymptotic",
            "k": g.k,
            "t": t,
            "chi": chi,
            "lndet_includes_constant": chi.is_some(),
        }),
        failure: None,
    })
}

fn route_table(method: Method, g: &GridArgs, grid: &[f64], t: Vec<f64>) -> Result<Table, CliError> {
    match method {
        Method::Fredholm => fredholm_table(g, grid),
        Method::Painleve if g.k == 0 => k0_painleve_table(g, grid),
        Method::Painleve => sweep_table(g, grid, t),
        Method::Asymptotic => asymptotic_table(g, grid, &t),
        Method::TwIntegral => tw_integral_table(g, grid),
    }
}

pub fn tw(args: &TwArgs) -> Result<(), CliError> {
    let t = deformation(&args.grid)?;
    let grid = grid_points(&args.grid)?;
    check_route(args.method, &args.grid, &grid)?;
    let json_format = match args.format {
        Some(f) => f == Format::Json,
        None => args.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json")),
    };
    let table = route_table(args.method, &args.grid, &grid, t)?;
    emit(args.out.as_deref(), &render_table(args, &table, json_format)?)?;
    match table.failure {
        Some(f) => Err(CliError::Numerical(format!("stopped at s = {}: {}", f.s, f.message))),
        None => Ok(()),
    }
}

fn available_routes(k: usize) -> Vec<Method> {
    if k == 0 {
        vec![Method::Fredholm, Method::TwIntegral, Method::Painleve]
    } else {
        vec![Method::Painleve, Method::Asymptotic]
    }
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let t = deformation(&args.grid)?;
    let grid = grid_points(&args.grid)?;
    let routes = if args.routes.is_empty() { available_routes(args.grid.k) } else { args.routes.clone() };
    if routes.len() < 2 {
        return Err(CliError::Usage("compare needs at least two routes".into()));
    }
    // The asymptotic route is compared on the negative part of the grid only.
    let mut tables = Vec::new();
    for &r in &routes {
        let sub: Vec<f64> = if r == Method::Asymptotic { grid.iter().copied().filter(|&s| s < 0.0).collect() } else { grid.clone() };
        if sub.is_empty() {
            return Err(CliError::Usage("asymptotic route needs grid points with s < 0".into()));
        }
        check_route(r, &args.grid, &sub)?;
        tables.push((r, sub));
    }
    let mut results = Vec::new();
    for (r, sub) in tables {
        let table = route_table(r, &args.grid, &sub, t.clone())?;
        if let Some(f) = &table.failure {
            return Err(CliError::Numerical(format!("{} route stopped at s = {}: {}", r.name(), f.s, f.message)));
        }
        results.push((r, table));
    }
    // Pairwise deviations: absolute in ln det where both carry the same
    // constant, relative in F otherwise.
    let mut pairs = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let (ra, ta) = &results[i];
            let (rb, tb) = &results[j];
            let lndet_comparable = args.grid.k == 0 || (*ra != Method::Asymptotic && *rb != Method::Asymptotic);
            let mut max_lndet: f64 = 0.0;
            let mut max_f_rel: f64 = 0.0;
            for a in &ta.rows {
                if let Some(b) = tb.rows.iter().find(|b| (b.s - a.s).abs() < 1e-9) {
                    if let (Some(x), Some(y)) = (a.lndet, b.lndet) {
                        max_lndet = max_lndet.max((x - y).abs());
                    }
                    if let (Some(x), Some(y)) = (a.f, b.f) {
                        max_f_rel = max_f_rel.max((x - y).abs() / y.abs().max(1e-300));
                    }
                }
            }
            pairs.push(json!({
                "routes": [ra.name(), rb.name()],
                "max_abs_lndet": lndet_comparable.then_some(max_lndet),
                "max_rel_F": max_f_rel,
            }));
        }
    }
    let table: Vec<Value> = grid
        .iter()
        .map(|&s| {
            let mut row = json!({ "s": s });
            for (r, tab) in &results {
                if let Some(x) = tab.rows.iter().find(|x| (x.s - s).abs() < 1e-9) {
                    row[r.name()] = json!({ "F": x.f, "lndet": x.lndet });
                }
            }
            row
        })
        .collect();
    let metadata: Vec<Value> = results.iter().map(|(_, t)| t.metadata.clone()).collect();
    let summary: Vec<String> = pairs
        .iter()
        .map(|p| {
            let lnd = p["max_abs_lndet"].as_f64().map_or("n/a".to_string(), |v| format!("{v:.3e}"));
            format!("{} vs {}: max |d lndet| {lnd}, max rel d F {:.3e}", p["routes"][0].as_str().unwrap_or(""), p["routes"][1].as_str().unwrap_or(""), p["max_rel_F"].as_f64().unwrap_or(f64::NAN))
        })
        .collect();
    let report = render_report(args, json!({ "deviations": pairs, "routes": metadata, "table": table }))?;
    let summary = format!("compare k = {} on {} points\n{}\n", args.grid.k, grid.len(), summary.join("\n"));
    match &args.out {
        Some(p) => {
            emit(Some(p), &report)?;
            print!("{summary}");
        }
        None => {
            eprint!("{summary}");
            emit(None, &report)?;
        }
    }
    Ok(())
}

/// Reads `s` and `F` columns from a CSV; `#` lines are skipped.
fn read_samples(path: &Path) -> Result<FSamples, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| CliError::Usage("samples file is empty".into()))?.split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or_else(|| CliError::Usage(format!("samples file lacks a `{name}` column")));
    let (is, iff) = (col("s")?, col("F")?);
    let (mut s, mut f) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        if line.starts_with("FAILED") {
            return Err(CliError::Usage("samples file comes from a failed run".into()));
        }
        let cells: Vec<&str> = line.split(',').collect();
        let num = |j: usize| {
            cells.get(j).and_then(|c| c.trim().parse::<f64>().ok()).ok_or_else(|| CliError::Usage(format!("bad value in data row {}", i + 1)))
        };
        s.push(num(is)?);
        f.push(num(iff)?);
    }
    Ok(FSamples { s, f, tail: 0.0 })
}

pub fn constants(args: &ConstantsArgs) -> Result<(), CliError> {
    let ln2_24 = std::f64::consts::LN_2 / 24.0;
    let (samples, provenance) = match &args.from_samples {
        Some(path) => {
            let smp = read_samples(path)?;
            let prov = json!({
                "source": path.display().to_string(),
                "grid": { "s_min": smp.s.first(), "s_max": smp.s.last(), "points": smp.s.len() },
                "anchor": smp.s.last(),
            });
            (smp, prov)
        }
        None => {
            let mut cfg = SweepConfig::new(1, args.s_min);
            cfg.step = args.s_step;
            cfg.degree = args.degree;
            cfg.validate().map_err(pipeline_error)?;
            let sweep = painleve_sweep(&cfg).map_err(pipeline_error)?;
            let max = |f: fn(&SweepPoint) -> f64| sweep.points.iter().map(f).fold(0.0, f64::max);
            let prov = json!({
                "source": "painleve sweep, k = 1, t = 0",
                "grid": { "s_min": cfg.s_min, "step": cfg.step, "s_max": sweep.points.last().map(|p| p.s), "degree": cfg.degree },
                "anchor": sweep.points.last().map(|p| p.s),
                "max_tail_bound": max(|p| p.tail_bound),
                "max_lower_tail": max(|p| p.lower_tail),
                "max_residual": max(|p| p.residual),
            });
            (sweep.samples(), prov)
        }
    };
    let est = estimate_chi1(&samples).map_err(|e| match e {
        twh_core::maps::MapsError::GridTooCoarse { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Usage(other.to_string()),
    })?;
    let payload = json!({
        "chi": { "value": chi_airy(), "ln2_over_24": ln2_24, "zeta_prime_minus_one": zeta_prime_minus_one() },
        "chi1": {
            "estimate": est.estimate,
            "uncertainty": est.uncertainty,
            "sequence": est.sequence,
            "quadrature_error": est.quadrature_error,
        },
        "provenance": provenance,
    });
    emit(args.out.as_deref(), &render_report(args, payload)?)
}

fn pipeline_error(e: PipelineError) -> CliError {
    use twh_core::fredholm::FredholmError;
    use twh_core::maps::MapsError;
    match e {
        PipelineError::InvalidConfig(m) => CliError::Usage(m),
        PipelineError::Maps(MapsError::WrongParameterCount { .. } | MapsError::IndexOutOfRange { .. })
        | PipelineError::Fredholm(FredholmError::OutOfRange { .. } | FredholmError::InvalidConfig(_)) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    }
}
