//! Orchestration of the four run modes and their artifacts.

use std::path::Path;
use std::time::Instant;

use kolmo_core::coefficients::{make_coefficients, CoefficientField};
use kolmo_core::fields::{GridSpec, ScalarField};
use kolmo_core::geometry::Point;
use kolmo_core::obstacle::{march, ordering_violation, Method, SolveReport, SolverConfig};
use kolmo_core::oracle::{compare_with_pde, lsmc_value, value_by_dynamic_programming, DpConfig, LsmcConfig, ProbeBox};
use kolmo_core::variational::{eval_j, recover_flux, variational_inequality_gap};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde_json::{json, Value};

use crate::config::{FieldSpec, Mode, RunConfig};
use crate::error::CliError;
use crate::expr::Expression;
use crate::output::{ensure_dir, write_field_csv, write_json};

/// Coefficients and data sampled on one grid.
pub struct Problem {
    pub grid: GridSpec,
    pub a: CoefficientField,
    pub f: ScalarField,
    pub psi: ScalarField,
    pub g: ScalarField,
}

pub fn make_grid(cfg: &RunConfig, n_v: &[usize], n_x: &[usize], n_t: usize) -> Result<GridSpec, CliError> {
    let dom = cfg.domain.to_box().map_err(CliError::config)?;
    Ok(GridSpec::new(dom, n_v.to_vec(), n_x.to_vec(), n_t)?)
}

fn cube_grid(cfg: &RunConfig, n: usize) -> Result<GridSpec, CliError> {
    let d = cfg.dimension;
    make_grid(cfg, &vec![n; d], &vec![n; d], n)
}

pub fn sample(name: &str, spec: &FieldSpec, grid: &GridSpec, cfg: &RunConfig) -> Result<ScalarField, CliError> {
    match spec {
        FieldSpec::Constant(c) => Ok(ScalarField::constant(grid, *c)),
        FieldSpec::Expr(src) => {
            let e = Expression::parse(src, grid.dim()).map_err(|m| CliError::config(format!("{name}: {m}")))?;
            let field = ScalarField::from_fn(grid, |v, x, t| e.eval(v, x, t));
            if field.values().iter().any(|a| !a.is_finite()) {
                return Err(CliError::config(format!("{name}: expression is not finite on the grid")));
            }
            Ok(field)
        }
        FieldSpec::Csv { csv } => crate::output::read_field_csv(&cfg.base_dir.join(csv), grid),
    }
}

/// Samples everything on `grid` and rejects data violating `ψ ≤ g` on the
/// Kolmogorov boundary before any solve.
pub fn build_problem(cfg: &RunConfig, grid: GridSpec) -> Result<Problem, CliError> {
    let a = make_coefficients(&cfg.coefficients.kind(cfg.seed), &grid)?;
    a.require_elliptic()?;
    let f = sample("f", &cfg.f, &grid, cfg)?;
    let psi = sample("psi", &cfg.psi, &grid, cfg)?;
    let g = sample("g", &cfg.g, &grid, cfg)?;
    if let Some((node, excess)) = ordering_violation(&psi, &g)? {
        let p = grid.point(node);
        return Err(CliError::config(format!(
            "ordering requirement psi <= g on the Kolmogorov boundary violated: psi - g = {excess} at v = {:?}, x = {:?}, t = {}",
            p.v, p.x, p.t
        )));
    }
    Ok(Problem { grid, a, f, psi, g })
}

fn solve(p: &Problem, cfg: &SolverConfig) -> Result<(ScalarField, SolveReport), CliError> {
    Ok(march(&p.a, &p.f, &p.psi, &p.g, cfg)?)
}

fn report_json(rep: &SolveReport) -> Value {
    json!({
        "iterations_total": rep.iterations.iter().sum::<usize>(),
        "iterations_max": rep.iterations.iter().copied().max().unwrap_or(0),
        "iterations_per_level": rep.iterations,
        "complementarity_residual": rep.complementarity_residual,
        "linear_residual": rep.linear_residual,
        "min_obstacle_gap": rep.min_obstacle_gap,
        "norm_w_u": rep.norm_w_u,
        "norm_w_g": rep.norm_w_g,
        "norm_f_hm1": rep.norm_f_hm1,
        "stability_ratio": rep.stability_ratio(),
    })
}

fn grid_json(g: &GridSpec) -> Value {
    json!({ "n_v": g.n_v(), "n_x": g.n_x(), "n_t": g.n_t(), "nodes": g.len() })
}

/// Common report head: mode and the resolved config.
fn envelope(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(cfg.schema_version));
    m.insert("mode".into(), json!(cfg.mode.name()));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m
}

/// Runs `cfg` and writes its artifacts to `out`. Wall-clock timings are
/// added to the report only when `timings` is set, which keeps the default
/// artifacts reproducible byte for byte.
pub fn run(cfg: &RunConfig, out: &Path, timings: bool) -> Result<(), CliError> {
    ensure_dir(out)?;
    let start = Instant::now();
    let (file, mut report, outcome) = match cfg.mode {
        Mode::Solve => run_solve(cfg, out)?,
        Mode::Verify => run_verify(cfg)?,
        Mode::Convergence => run_convergence(cfg)?,
        Mode::Oracle => run_oracle(cfg, out)?,
    };
    if timings {
        report.insert("timings".into(), json!({ "wall_seconds": start.elapsed().as_secs_f64() }));
    }
    write_json(&out.join(file), &Value::Object(report))?;
    outcome
}

type ModeResult = (&'static str, serde_json::Map<String, Value>, Result<(), CliError>);

fn run_solve(cfg: &RunConfig, out: &Path) -> Result<ModeResult, CliError> {
    let gs = &cfg.grid;
    let p = build_problem(cfg, make_grid(cfg, &gs.n_v, &gs.n_x, gs.n_t)?)?;
    let (u, rep) = solve(&p, &cfg.solver.to_core())?;
    let j = eval_j(&u, &p.f, &p.a)?;
    write_field_csv(&out.join("solution.csv"), &u)?;
    let mut m = envelope(cfg);
    m.insert("grid".into(), grid_json(&p.grid));
    let mut r = report_json(&rep);
    r["j_value"] = json!(j);
    m.insert("report".into(), r);
    Ok(("report.json", m, Ok(())))
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Check { name, value, threshold, passed: value <= threshold }
    }

    fn at_least(name: &'static str, value: f64, threshold: f64) -> Self {
        Check { name, value, threshold, passed: value >= threshold }
    }
}

/// Random admissible competitor: `u` plus noise vanishing on the Kolmogorov
/// boundary, lifted onto the obstacle.
fn competitor(u: &ScalarField, psi: &ScalarField, rng: &mut ChaCha8Rng) -> ScalarField {
    let g = u.grid();
    let amp = Uniform::new(0.01, 1.0).expect("valid range").sample(rng) * (1.0 + u.max_abs());
    let unit = Uniform::new(-1.0, 1.0).expect("valid range");
    let mut w = u.clone();
    for node in 0..g.len() {
        if !g.is_kolmogorov_node(node) {
            let val = u.values()[node] + amp * unit.sample(rng);
            w.values_mut()[node] = val.max(psi.values()[node]);
        }
    }
    w
}

fn run_verify(cfg: &RunConfig) -> Result<ModeResult, CliError> {
    let tol = cfg.verify.tolerance;
    let gs = &cfg.grid;
    let p = build_problem(cfg, make_grid(cfg, &gs.n_v, &gs.n_x, gs.n_t)?)?;
    let solver = cfg.solver.to_core();
    let (u, rep) = solve(&p, &solver)?;
    let grid = &p.grid;
    let mut checks = Vec::new();

    let ell = p.a.verify_ellipticity();
    checks.push(Check { name: "ellipticity", value: ell.min_eigenvalue, threshold: p.a.lambda(), passed: ell.ok });
    checks.push(Check::at_least("obstacle", rep.min_obstacle_gap, -tol));
    checks.push(Check::at_most("complementarity", rep.complementarity_residual, tol));
    let boundary = (0..grid.len())
        .filter(|&n| grid.is_kolmogorov_node(n))
        .map(|n| (u.values()[n] - p.g.values()[n]).abs())
        .fold(0.0f64, f64::max);
    checks.push(Check::at_most("boundary_data", boundary, tol));

    // raising the boundary data cannot lower the solution
    let raised = Problem { grid: grid.clone(), a: p.a.clone(), f: p.f.clone(), psi: p.psi.clone(), g: p.g.map(|x| x + 1.0) };
    let (u_raised, _) = solve(&raised, &solver)?;
    let drop = u.values().iter().zip(u_raised.values()).map(|(a, b)| a - b).fold(0.0f64, f64::max);
    checks.push(Check::at_most("comparison_principle", drop, tol));

    let cert = recover_flux(&u, &p.f, &p.a)?;
    let scale = 1.0 + rep.norm_w_u + rep.norm_f_hm1;
    checks.push(Check::at_most("flux_divergence", cert.divergence_residual, tol * scale));
    let j = eval_j(&u, &p.f, &p.a)?;
    checks.push(Check::at_least("j_nonnegative", j, -tol));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_gap = f64::INFINITY;
    for _ in 0..cfg.verify.competitors {
        let w = competitor(&u, &p.psi, &mut rng);
        worst_gap = worst_gap.min(variational_inequality_gap(&u, &w, &p.f, &p.psi, &p.a)?);
    }
    if cfg.verify.competitors > 0 {
        checks.push(Check::at_least("variational_inequality", worst_gap, -tol));
    }

    let other = SolverConfig { method: if solver.method == Method::Psor { Method::Penalized } else { Method::Psor }, ..solver };
    let (u_other, _) = solve(&p, &other)?;
    checks.push(Check::at_most("method_agreement", u.max_abs_diff(&u_other)?, 1e-5));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let mut m = envelope(cfg);
    m.insert("grid".into(), grid_json(grid));
    m.insert("report".into(), report_json(&rep));
    m.insert(
        "checks".into(),
        Value::Array(
            checks
                .iter()
                .map(|c| json!({ "name": c.name, "passed": c.passed, "value": c.value, "threshold": c.threshold }))
                .collect(),
        ),
    );
    m.insert("passed".into(), json!(failed.is_empty()));
    let outcome = if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("failed checks: {}", failed.join(", "))))
    };
    Ok(("verify.json", m, outcome))
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|a| a.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn run_convergence(cfg: &RunConfig) -> Result<ModeResult, CliError> {
    let conv = cfg.convergence.as_ref().expect("validated convergence section");
    let exact = FieldSpec::Expr(conv.exact.clone());
    let solver = cfg.solver.to_core();
    let mut rows = Vec::new();
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for &n in &conv.levels {
        let p = build_problem(cfg, cube_grid(cfg, n)?)?;
        let (u, rep) = solve(&p, &solver)?;
        let u_exact = sample("convergence.exact", &exact, &p.grid, cfg)?;
        let err = u.max_abs_diff(&u_exact)?;
        let j = eval_j(&u, &p.f, &p.a)?;
        let h = p.grid.h_v().iter().chain(p.grid.h_x()).copied().fold(0.0f64, f64::max);
        rows.push(json!({
            "n": n,
            "h": h,
            "h_t": p.grid.h_t(),
            "max_error": err,
            "j_value": j,
            "iterations_total": rep.iterations.iter().sum::<usize>(),
        }));
        hs.push(h);
        errs.push(err);
    }
    let orders: Vec<f64> = (1..hs.len()).map(|i| (errs[i - 1] / errs[i]).ln() / (hs[i - 1] / hs[i]).ln()).collect();
    let fitted = if hs.len() >= 2 && errs.iter().all(|e| *e > 0.0) { Some(fitted_order(&hs, &errs)) } else { None };
    let mut m = envelope(cfg);
    m.insert("levels".into(), Value::Array(rows));
    m.insert("pairwise_orders".into(), json!(orders));
    m.insert("fitted_order".into(), json!(fitted));
    m.insert("monotone".into(), json!(errs.windows(2).all(|w| w[1] < w[0])));
    Ok(("convergence.json", m, Ok(())))
}

fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<ModeResult, CliError> {
    let oc = cfg.oracle.as_ref().expect("validated oracle section");
    let payoff = Expression::parse(&oc.payoff, cfg.dimension).map_err(CliError::config)?;
    let pay = |v: &[f64], x: &[f64]| payoff.eval(v, x, 0.0);
    let probe = ProbeBox {
        v_lo: oc.probe.v_lo.clone(),
        v_hi: oc.probe.v_hi.clone(),
        x_lo: oc.probe.x_lo.clone(),
        x_hi: oc.probe.x_hi.clone(),
    };
    let dp_cfg = DpConfig { gh_order: oc.gh_order, early_exercise: true };
    let solver = cfg.solver.to_core();
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut finest = None;
    for &n in &oc.levels {
        let p = build_problem(cfg, cube_grid(cfg, n)?)?;
        let (u, _) = solve(&p, &solver)?;
        let dp = value_by_dynamic_programming(pay, &p.grid, &dp_cfg)?;
        let last = p.grid.n_t() - 1;
        let gap = compare_with_pde(&u, &dp.value, &probe, last, oc.tolerance)?;
        rows.push(json!({
            "n": n,
            "max_gap": gap.max_gap,
            "mean_gap": gap.mean_gap,
            "probe_nodes": gap.n_probe,
            "clipped_payoffs": dp.clipped,
        }));
        gaps.push(gap.max_gap);
        finest = Some((u, dp.value));
    }
    let (u, dp) = finest.expect("at least one level");
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let within = gaps.last().is_some_and(|g| *g < oc.tolerance);
    let passed = monotone && within;

    let mut m = envelope(cfg);
    m.insert("levels".into(), Value::Array(rows));
    m.insert("monotone".into(), json!(monotone));
    m.insert("finest_within_tolerance".into(), json!(within));
    m.insert("passed".into(), json!(passed));

    if let Some(ls) = &oc.lsmc {
        let grid = dp.grid();
        let horizon = cfg.domain.t_hi - cfg.domain.t_lo;
        let lcfg = LsmcConfig { n_paths: ls.n_paths, n_steps: grid.n_t() - 1, basis_degree: ls.basis_degree, seed: cfg.seed };
        let sv = lsmc_value(pay, &ls.start_v, &ls.start_x, horizon, &lcfg)?;
        let start = Point::new(ls.start_v.clone(), ls.start_x.clone(), cfg.domain.t_hi)?;
        let dp_start = dp.interpolate(&start)?;
        let pde_start = u.interpolate(&start)?;
        m.insert(
            "lsmc".into(),
            json!({
                "value": sv.value,
                "standard_error": sv.standard_error,
                "n_paths": sv.n_paths,
                "n_steps": lcfg.n_steps,
                "basis_degree": sv.basis_degree,
                "rank_reduced": sv.rank_reduced,
                "dp_value": dp_start,
                "pde_value": pde_start,
                "within_3se_of_dp": (sv.value - dp_start).abs() <= 3.0 * sv.standard_error,
            }),
        );
    }
    write_field_csv(&out.join("pde_solution.csv"), &u)?;
    write_field_csv(&out.join("dp_value.csv"), &dp)?;
    let outcome = if passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!("PDE/oracle gaps {gaps:?} not monotone or above {}", oc.tolerance)))
    };
    Ok(("oracle.json", m, outcome))
}
