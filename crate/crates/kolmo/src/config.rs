//! JSON run configuration: parsing, defaulting and validation.
//!
//! Validation collects every problem it finds instead of stopping at the
//! first, so a broken config is reported in one pass.

use std::fs;
use std::path::{Path, PathBuf};

use kolmo_core::coefficients::CoefficientKind;
use kolmo_core::geometry::BoxDomain;
use kolmo_core::obstacle::{Method, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::expr::{Expression, MAX_DIM};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Solve,
    Verify,
    Convergence,
    Oracle,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Verify => "verify",
            Mode::Convergence => "convergence",
            Mode::Oracle => "oracle",
        }
    }
}

/// Data for `f`, `psi` or `g`: a constant, an expression, or gridded values
/// from a CSV file in the same layout the solver writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Expr(String),
    Csv { csv: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub v_lo: Vec<f64>,
    pub v_hi: Vec<f64>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl DomainSpec {
    fn unit(d: usize) -> Self {
        DomainSpec {
            v_lo: vec![0.0; d],
            v_hi: vec![1.0; d],
            x_lo: vec![0.0; d],
            x_hi: vec![1.0; d],
            t_lo: 0.0,
            t_hi: 1.0,
        }
    }

    pub fn to_box(&self) -> Result<BoxDomain, String> {
        BoxDomain::new(self.v_lo.clone(), self.v_hi.clone(), self.x_lo.clone(), self.x_hi.clone(), self.t_lo, self.t_hi)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    n_v: Option<Vec<usize>>,
    n_x: Option<Vec<usize>>,
    n_t: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSettings {
    pub n_v: Vec<usize>,
    pub n_x: Vec<usize>,
    pub n_t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Identity,
    Diagonal { diag: Vec<f64> },
    Checkerboard { a1: Vec<f64>, a2: Vec<f64>, period: usize },
    RandomSpd { lambda: f64, big_lambda: f64, seed: Option<u64> },
}

impl CoefficientSpec {
    /// Core coefficient kind; a random field without its own seed uses the
    /// run seed.
    pub fn kind(&self, run_seed: u64) -> CoefficientKind {
        match self {
            CoefficientSpec::Identity => CoefficientKind::Identity,
            CoefficientSpec::Diagonal { diag } => CoefficientKind::Diagonal(diag.clone()),
            CoefficientSpec::Checkerboard { a1, a2, period } => {
                CoefficientKind::Checkerboard { a1: a1.clone(), a2: a2.clone(), period: *period }
            }
            CoefficientSpec::RandomSpd { lambda, big_lambda, seed } => {
                CoefficientKind::RandomSpd { lambda: *lambda, big_lambda: *big_lambda, seed: seed.unwrap_or(run_seed) }
            }
        }
    }

    fn validate(&self, d: usize, errors: &mut Vec<String>) {
        let positive = |name: &str, a: &[f64], errors: &mut Vec<String>| {
            if a.len() != d {
                errors.push(format!("coefficients.{name}: expected {d} entries, found {}", a.len()));
            }
            if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                errors.push(format!("coefficients.{name}: entries must be positive"));
            }
        };
        match self {
            CoefficientSpec::Identity => {}
            CoefficientSpec::Diagonal { diag } => positive("diag", diag, errors),
            CoefficientSpec::Checkerboard { a1, a2, period } => {
                positive("a1", a1, errors);
                positive("a2", a2, errors);
                if *period == 0 {
                    errors.push("coefficients.period: must be at least 1".into());
                }
            }
            CoefficientSpec::RandomSpd { lambda, big_lambda, .. } => {
                if !(*lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
                    errors.push("coefficients: random_spd needs 0 < lambda <= big_lambda".into());
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<String>,
    omega: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    epsilon_penalty: Option<f64>,
    newton_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    pub method: String,
    pub omega: f64,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub epsilon_penalty: f64,
    pub newton_max: usize,
}

impl SolverSettings {
    pub fn to_core(&self) -> SolverConfig {
        SolverConfig {
            method: if self.method == "penalized" { Method::Penalized } else { Method::Psor },
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
            epsilon_penalty: self.epsilon_penalty,
            newton_max: self.newton_max,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    levels: Option<Vec<usize>>,
    exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSettings {
    /// Nodes per axis (all axes, time included) at each refinement level.
    pub levels: Vec<usize>,
    pub exact: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub v_lo: Vec<f64>,
    pub v_hi: Vec<f64>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLsmc {
    n_paths: Option<usize>,
    basis_degree: Option<usize>,
    start_v: Option<Vec<f64>>,
    start_x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LsmcSettings {
    pub n_paths: usize,
    pub basis_degree: usize,
    pub start_v: Vec<f64>,
    pub start_x: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    payoff: Option<String>,
    levels: Option<Vec<usize>>,
    gh_order: Option<usize>,
    probe: Option<ProbeSpec>,
    tolerance: Option<f64>,
    lsmc: Option<RawLsmc>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSettings {
    pub payoff: String,
    pub levels: Vec<usize>,
    pub gh_order: usize,
    pub probe: ProbeSpec,
    pub tolerance: f64,
    pub lsmc: Option<LsmcSettings>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    tolerance: Option<f64>,
    competitors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySettings {
    pub tolerance: f64,
    pub competitors: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    mode: Option<Mode>,
    dimension: Option<usize>,
    domain: Option<DomainSpec>,
    grid: Option<RawGrid>,
    coefficients: Option<CoefficientSpec>,
    f: Option<FieldSpec>,
    psi: Option<FieldSpec>,
    g: Option<FieldSpec>,
    solver: Option<RawSolver>,
    convergence: Option<RawConvergence>,
    oracle: Option<RawOracle>,
    verify: Option<RawVerify>,
    seed: Option<u64>,
}

/// Fully resolved configuration; this is what reports echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub mode: Mode,
    pub dimension: usize,
    pub domain: DomainSpec,
    pub grid: GridSettings,
    pub coefficients: CoefficientSpec,
    pub f: FieldSpec,
    pub psi: FieldSpec,
    pub g: FieldSpec,
    pub solver: SolverSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSettings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSettings>,
    pub verify: VerifySettings,
    pub seed: u64,
    /// Directory relative CSV paths are resolved against; not echoed.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Reads and validates a config file. `mode` (from the command line)
/// takes precedence over the file's `mode`, and `seed` over its `seed`.
pub fn parse_config(path: &Path, mode: Option<Mode>, seed: Option<u64>) -> Result<RunConfig, Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| vec![format!("cannot read {}: {e}", path.display())])?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base_dir, mode, seed)
}

pub fn parse_config_str(text: &str, base_dir: &Path, mode: Option<Mode>, seed: Option<u64>) -> Result<RunConfig, Vec<String>> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| vec![format!("invalid config JSON at line {}, column {}: {e}", e.line(), e.column())])?;
    resolve(raw, base_dir, mode, seed)
}

fn resolve(raw: RawConfig, base_dir: &Path, mode: Option<Mode>, seed: Option<u64>) -> Result<RunConfig, Vec<String>> {
    let mut errors = Vec::new();
    match raw.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => errors.push(format!("schema_version: unsupported version {v} (expected {SCHEMA_VERSION})")),
        None => errors.push(format!("schema_version: missing (expected {SCHEMA_VERSION})")),
    }
    let mode = match mode.or(raw.mode) {
        Some(m) => m,
        None => {
            errors.push("mode: missing (give it in the config or as a subcommand)".into());
            Mode::Solve
        }
    };
    let d = raw.dimension.or(raw.domain.as_ref().map(|dom| dom.v_lo.len())).unwrap_or(1);
    if d == 0 || d > MAX_DIM {
        errors.push(format!("dimension: must lie in 1..={MAX_DIM}, got {d}"));
        return Err(errors);
    }
    let domain = raw.domain.unwrap_or_else(|| DomainSpec::unit(d));
    for (name, a) in [("v_lo", &domain.v_lo), ("v_hi", &domain.v_hi), ("x_lo", &domain.x_lo), ("x_hi", &domain.x_hi)] {
        if a.len() != d {
            errors.push(format!("domain.{name}: expected {d} entries, found {}", a.len()));
        }
    }
    if errors.is_empty() {
        if let Err(e) = domain.to_box() {
            errors.push(format!("domain: {e}"));
        }
    }

    let grid = resolve_grid(raw.grid.unwrap_or_default(), d, &mut errors);
    let coefficients = raw.coefficients.unwrap_or(CoefficientSpec::Identity);
    coefficients.validate(d, &mut errors);

    // the exact solution supplies the boundary data of a convergence study,
    // and the payoff is both obstacle and boundary data of an oracle run
    let exact = raw.convergence.as_ref().and_then(|c| c.exact.clone()).map(FieldSpec::Expr);
    let payoff = raw.oracle.as_ref().and_then(|o| o.payoff.clone()).map(FieldSpec::Expr);
    let f = raw.f.unwrap_or(FieldSpec::Constant(0.0));
    let psi = match (mode, raw.psi, &payoff) {
        (Mode::Oracle, Some(p), Some(pay)) if &p != pay => {
            errors.push("psi: oracle runs take the obstacle from oracle.payoff".into());
            p
        }
        (_, Some(p), _) => p,
        (Mode::Oracle, None, Some(pay)) => pay.clone(),
        _ => FieldSpec::Constant(-1e6),
    };
    let g = match (mode, raw.g) {
        (_, Some(g)) => g,
        (Mode::Convergence, None) => exact.unwrap_or(FieldSpec::Constant(0.0)),
        (Mode::Oracle, None) => payoff.unwrap_or(FieldSpec::Constant(0.0)),
        _ => FieldSpec::Constant(0.0),
    };
    let varying_grid = matches!(mode, Mode::Convergence | Mode::Oracle);
    for (name, spec) in [("f", &f), ("psi", &psi), ("g", &g)] {
        check_field(name, spec, d, base_dir, varying_grid, &mut errors);
    }

    let rs = raw.solver.unwrap_or_default();
    let defaults = SolverConfig::default();
    let solver = SolverSettings {
        method: rs.method.unwrap_or_else(|| "psor".into()),
        omega: rs.omega.unwrap_or(defaults.omega),
        tol: rs.tol.unwrap_or(defaults.tol),
        max_iter: rs.max_iter,
        epsilon_penalty: rs.epsilon_penalty.unwrap_or(defaults.epsilon_penalty),
        newton_max: rs.newton_max.unwrap_or(defaults.newton_max),
    };
    if solver.method != "psor" && solver.method != "penalized" {
        errors.push(format!("solver.method: expected \"psor\" or \"penalized\", got \"{}\"", solver.method));
    }
    if let Err(e) = solver.to_core().validate() {
        errors.push(format!("solver: {e}"));
    }

    let convergence = match (mode, raw.convergence) {
        (Mode::Convergence, None) => {
            errors.push("convergence: section required in convergence mode".into());
            None
        }
        (_, None) => None,
        (_, Some(rc)) => {
            let levels = rc.levels.unwrap_or_else(|| vec![16, 32, 64]);
            check_levels("convergence.levels", &levels, &mut errors);
            let exact = rc.exact.unwrap_or_default();
            if exact.is_empty() {
                errors.push("convergence.exact: the exact solution expression is required".into());
            } else if let Err(e) = Expression::parse(&exact, d) {
                errors.push(format!("convergence.exact: {e}"));
            }
            Some(ConvergenceSettings { levels, exact })
        }
    };

    let oracle = match (mode, raw.oracle) {
        (Mode::Oracle, None) => {
            errors.push("oracle: section required in oracle mode".into());
            None
        }
        (_, None) => None,
        (_, Some(ro)) => Some(resolve_oracle(ro, d, &domain, &mut errors)),
    };
    if mode == Mode::Oracle {
        if coefficients != CoefficientSpec::Identity {
            errors.push("coefficients: the stochastic oracle requires kind \"identity\"".into());
        }
        if f != FieldSpec::Constant(0.0) {
            errors.push("f: the stochastic oracle requires f = 0".into());
        }
    }

    let rv = raw.verify.unwrap_or_default();
    let verify = VerifySettings { tolerance: rv.tolerance.unwrap_or(1e-6), competitors: rv.competitors.unwrap_or(20) };
    if !(verify.tolerance > 0.0) {
        errors.push("verify.tolerance: must be positive".into());
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(RunConfig {
        schema_version: SCHEMA_VERSION,
        mode,
        dimension: d,
        domain,
        grid,
        coefficients,
        f,
        psi,
        g,
        solver,
        convergence,
        oracle,
        verify,
        seed: seed.or(raw.seed).unwrap_or(0),
        base_dir: base_dir.to_path_buf(),
    })
}

fn resolve_grid(rg: RawGrid, d: usize, errors: &mut Vec<String>) -> GridSettings {
    let n = rg.n.unwrap_or(17);
    let n_v = rg.n_v.unwrap_or_else(|| vec![n; d]);
    let n_x = rg.n_x.unwrap_or_else(|| vec![n; d]);
    let n_t = rg.n_t.unwrap_or(n);
    for (name, axes) in [("n_v", &n_v), ("n_x", &n_x)] {
        if axes.len() != d {
            errors.push(format!("grid.{name}: expected {d} entries, found {}", axes.len()));
        }
        for (k, &m) in axes.iter().enumerate() {
            if m < 3 {
                errors.push(format!("grid.{name}[{k}]: grid axis below minimum 3"));
            }
        }
    }
    if n_t < 3 {
        errors.push("grid.n_t: grid axis below minimum 3".into());
    }
    GridSettings { n_v, n_x, n_t }
}

fn check_levels(name: &str, levels: &[usize], errors: &mut Vec<String>) {
    if levels.is_empty() {
        errors.push(format!("{name}: at least one level is required"));
    }
    if levels.iter().any(|&n| n < 3) {
        errors.push(format!("{name}: grid axis below minimum 3"));
    }
}

fn check_field(name: &str, spec: &FieldSpec, d: usize, base_dir: &Path, varying_grid: bool, errors: &mut Vec<String>) {
    match spec {
        FieldSpec::Constant(c) if !c.is_finite() => errors.push(format!("{name}: constant must be finite")),
        FieldSpec::Constant(_) => {}
        FieldSpec::Expr(src) => {
            if let Err(e) = Expression::parse(src, d) {
                errors.push(format!("{name}: {e}"));
            }
        }
        FieldSpec::Csv { csv } => {
            if varying_grid {
                errors.push(format!("{name}: gridded CSV data needs a fixed grid (solve or verify mode)"));
            }
            if !base_dir.join(csv).is_file() {
                errors.push(format!("{name}: data file {csv} not found"));
            }
        }
    }
}

fn resolve_oracle(ro: RawOracle, d: usize, domain: &DomainSpec, errors: &mut Vec<String>) -> OracleSettings {
    let payoff = ro.payoff.unwrap_or_default();
    if payoff.is_empty() {
        errors.push("oracle.payoff: expression required".into());
    } else if let Err(e) = Expression::parse(&payoff, d) {
        errors.push(format!("oracle.payoff: {e}"));
    }
    let levels = ro.levels.unwrap_or_else(|| vec![17, 33, 65]);
    check_levels("oracle.levels", &levels, errors);
    let gh_order = ro.gh_order.unwrap_or(8);
    if gh_order == 0 || gh_order > 64 {
        errors.push("oracle.gh_order: must lie in 1..=64".into());
    }
    // default probe: the middle half of the domain
    let mid = |lo: &[f64], hi: &[f64], s: f64| lo.iter().zip(hi).map(|(l, h)| l + s * (h - l)).collect::<Vec<f64>>();
    let probe = ro.probe.unwrap_or_else(|| ProbeSpec {
        v_lo: mid(&domain.v_lo, &domain.v_hi, 0.25),
        v_hi: mid(&domain.v_lo, &domain.v_hi, 0.75),
        x_lo: mid(&domain.x_lo, &domain.x_hi, 0.25),
        x_hi: mid(&domain.x_lo, &domain.x_hi, 0.75),
    });
    for (name, lo, hi, dlo, dhi) in [
        ("v", &probe.v_lo, &probe.v_hi, &domain.v_lo, &domain.v_hi),
        ("x", &probe.x_lo, &probe.x_hi, &domain.x_lo, &domain.x_hi),
    ] {
        if lo.len() != d || hi.len() != d {
            errors.push(format!("oracle.probe.{name}: expected {d} entries per bound"));
            continue;
        }
        for k in 0..d {
            if !(lo[k] <= hi[k] && lo[k] > dlo[k] && hi[k] < dhi[k]) {
                errors.push(format!("oracle.probe.{name}[{k}]: probe must be a nonempty box strictly inside the domain"));
            }
        }
    }
    let tolerance = ro.tolerance.unwrap_or(5e-2);
    if !(tolerance > 0.0) {
        errors.push("oracle.tolerance: must be positive".into());
    }
    let lsmc = ro.lsmc.map(|rl| {
        let centre = |lo: &[f64], hi: &[f64]| lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect::<Vec<f64>>();
        let s = LsmcSettings {
            n_paths: rl.n_paths.unwrap_or(100_000),
            basis_degree: rl.basis_degree.unwrap_or(3),
            start_v: rl.start_v.unwrap_or_else(|| centre(&domain.v_lo, &domain.v_hi)),
            start_x: rl.start_x.unwrap_or_else(|| centre(&domain.x_lo, &domain.x_hi)),
        };
        if s.n_paths < 2 {
            errors.push("oracle.lsmc.n_paths: at least 2 paths".into());
        }
        if s.basis_degree == 0 {
            errors.push("oracle.lsmc.basis_degree: must be at least 1".into());
        }
        if s.start_v.len() != d || s.start_x.len() != d {
            errors.push(format!("oracle.lsmc: start point needs {d} velocity and {d} position entries"));
        }
        s
    });
    OracleSettings { payoff, levels, gh_order, probe, tolerance, lsmc }
}
