//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! show up in `cargo test` output.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use kolmo_core::assembly::{build_time_step, LcpSlice, LevelLayout};
use kolmo_core::coefficients::{make_coefficients, CoefficientField, CoefficientKind};
use kolmo_core::fields::{poincare_ratio, GridSpec, ScalarField};
use kolmo_core::geometry::{dilate, galilean_shift, group_compose, group_inverse, BoxDomain, Point};
use kolmo_core::linalg::SparseOperator;
use kolmo_core::obstacle::{march, solve_lcp_psor, Method, SolveReport, SolverConfig};
use kolmo_core::oracle::{compare_with_pde, lsmc_value, value_by_dynamic_programming, DpConfig, LsmcConfig, ProbeBox};
use kolmo_core::variational::{eval_j, variational_inequality_gap};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

type Data = dyn Fn(&[f64], &[f64], f64) -> f64;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn uniform(lo: f64, hi: f64) -> Uniform<f64> {
    Uniform::new(lo, hi).expect("valid range")
}

fn solve(a: &CoefficientField, f: &ScalarField, psi: &ScalarField, g: &ScalarField, cfg: &SolverConfig) -> (ScalarField, SolveReport) {
    march(a, f, psi, g, cfg).expect("solve succeeds")
}

fn identity(grid: &GridSpec) -> CoefficientField {
    make_coefficients(&CoefficientKind::Identity, grid).unwrap()
}

fn mms_exact(v: &[f64], x: &[f64], t: f64) -> f64 {
    (PI * v[0]).sin() * x[0].cos() * (-t).exp()
}

// L u = u_vv + v u_x - u_t for the exact solution above
fn mms_rhs(v: &[f64], x: &[f64], t: f64) -> f64 {
    (1.0 - PI * PI) * mms_exact(v, x, t) - v[0] * (PI * v[0]).sin() * x[0].sin() * (-t).exp()
}

/// Max error and `J[u_h, f]` of the manufactured problem on `n³` nodes.
fn mms_level(n: usize) -> (f64, f64, f64) {
    let grid = GridSpec::uniform(BoxDomain::unit(1), n).unwrap();
    let a = identity(&grid);
    let f = ScalarField::from_fn(&grid, mms_rhs);
    let exact = ScalarField::from_fn(&grid, mms_exact);
    let psi = ScalarField::constant(&grid, -1e6);
    let (u, _) = solve(&a, &f, &psi, &exact, &SolverConfig::default());
    (grid.h_v()[0], u.max_abs_diff(&exact).unwrap(), eval_j(&u, &f, &a).unwrap())
}

fn sci(a: &[f64]) -> String {
    let parts: Vec<String> = a.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = h.iter().zip(e).map(|(a, b)| (a.ln(), b.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn manufactured_convergence(levels: &[(f64, f64, f64)], secs: f64) -> Outcome {
    let h: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let e: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let order = slope(&h, &e);
    let decreasing = e.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        name: "manufactured-solution convergence",
        passed: decreasing && order >= 0.9 && secs < 120.0,
        detail: format!("max errors {}, fitted order {order:.3} (>= 0.9), {secs:.1} s (< 120 s)", sci(&e)),
    }
}

fn zero_minimizer(levels: &[(f64, f64, f64)]) -> Outcome {
    let j: Vec<f64> = levels.iter().map(|l| l.2).collect();
    let decreasing = j.windows(2).all(|w| w[1] < w[0]);
    let last = *j.last().unwrap();
    Outcome {
        name: "zero-minimizer certificate",
        passed: decreasing && last < 1e-2,
        detail: format!("J[u_h, f] = {}, monotone {decreasing}, finest < 1e-2", sci(&j)),
    }
}

/// The active-obstacle instance on `n³` nodes with source `f`.
struct Active {
    a: CoefficientField,
    f: ScalarField,
    psi: ScalarField,
    g: ScalarField,
}

fn active_instance(n: usize, f: impl Fn(&[f64], &[f64], f64) -> f64) -> Active {
    let grid = GridSpec::uniform(BoxDomain::unit(1), n).unwrap();
    Active {
        a: identity(&grid),
        f: ScalarField::from_fn(&grid, f),
        psi: ScalarField::zeros(&grid),
        g: ScalarField::zeros(&grid),
    }
}

/// `max |min(M u - q, u - ψ)|` over every time step, from freshly assembled
/// slices, and `min(u - ψ)`.
fn recheck_complementarity(p: &Active, u: &ScalarField) -> (f64, f64) {
    let grid = u.grid();
    let layout = LevelLayout::new(grid);
    let mut worst = 0.0f64;
    for it in 1..grid.n_t() {
        let s = build_time_step(&p.a, &layout, it, u.level(it - 1), &p.f, &p.g, &p.psi).unwrap();
        let level = u.level(it);
        let ul: Vec<f64> = s.unknowns.iter().map(|&ln| level[ln]).collect();
        let r = s.m.mul_vec(&ul);
        for i in 0..s.dim() {
            worst = worst.max((r[i] - s.q[i]).min(ul[i] - s.psi[i]).abs());
        }
    }
    let gap = u.values().iter().zip(p.psi.values()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    (worst, gap)
}

fn free_boundary_source(_: &[f64], x: &[f64], _: f64) -> f64 {
    8.0 * x[0] - 4.0
}

fn complementarity(unit_source: &(Active, ScalarField), variant: &(Active, ScalarField)) -> Outcome {
    let (r1, g1) = recheck_complementarity(&unit_source.0, &unit_source.1);
    let (r2, g2) = recheck_complementarity(&variant.0, &variant.1);
    Outcome {
        name: "complementarity",
        passed: r1 < 1e-7 && g1 >= -1e-10 && r2 < 1e-7 && g2 >= -1e-10,
        detail: format!(
            "f=1: residual {r1:.2e} (< 1e-7), min(u-psi) {g1:.2e}; f=8x-4: residual {r2:.2e}, min(u-psi) {g2:.2e}"
        ),
    }
}

fn psor_vs_penalty(unit_source: &(Active, ScalarField), variant: &(Active, ScalarField)) -> Outcome {
    let cfg = SolverConfig { method: Method::Penalized, epsilon_penalty: 1e-8, ..SolverConfig::default() };
    let gaps: Vec<f64> = [unit_source, variant]
        .iter()
        .map(|(p, u)| solve(&p.a, &p.f, &p.psi, &p.g, &cfg).0.max_abs_diff(u).unwrap())
        .collect();
    Outcome {
        name: "PSOR vs penalization",
        passed: gaps.iter().all(|&g| g < 1e-5),
        detail: format!("max nodewise gap f=1: {:.2e}, f=8x-4: {:.2e} (< 1e-5)", gaps[0], gaps[1]),
    }
}

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            let pivot_row = a[k].clone();
            for (aij, akj) in a[i][k..].iter_mut().zip(&pivot_row[k..]) {
                *aij -= m * akj;
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        x[k] = (b[k] - (k + 1..n).map(|j| a[k][j] * x[j]).sum::<f64>()) / a[k][k];
    }
    x
}

/// Tries every active set; returns the first (for an M-matrix, the only)
/// complementary solution.
fn enumerate_lcp(m: &[Vec<f64>], q: &[f64], psi: &[f64]) -> Vec<f64> {
    let n = q.len();
    for mask in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        let mut u = psi.to_vec();
        if !free.is_empty() {
            let a = free.iter().map(|&i| free.iter().map(|&j| m[i][j]).collect()).collect();
            let b = free
                .iter()
                .map(|&i| q[i] - (0..n).filter(|j| mask & (1 << j) != 0).map(|j| m[i][j] * psi[j]).sum::<f64>())
                .collect();
            for (&i, val) in free.iter().zip(dense_solve(a, b)) {
                u[i] = val;
            }
        }
        let ok = (0..n).all(|i| {
            let r: f64 = (0..n).map(|j| m[i][j] * u[j]).sum::<f64>() - q[i];
            if mask & (1 << i) != 0 {
                r >= -1e-12
            } else {
                u[i] >= psi[i] - 1e-12
            }
        });
        if ok {
            return u;
        }
    }
    panic!("no complementary solution found");
}

fn lcp_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (off, coin, margin, data) = (uniform(-1.0, 0.0), uniform(0.0, 1.0), uniform(0.1, 1.0), uniform(-1.0, 1.0));
    // Gauss-Seidel sweeps: over-relaxation is not guaranteed to converge on
    // nonsymmetric M-matrices
    let cfg = SolverConfig { omega: 1.0, tol: 1e-12, max_iter: Some(100_000), ..SolverConfig::default() };
    let n = 10;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                if i != j && coin.sample(&mut rng) < 0.5 {
                    *e = off.sample(&mut rng);
                }
            }
            row[i] = row.iter().map(|e: &f64| e.abs()).sum::<f64>() + margin.sample(&mut rng);
        }
        let q: Vec<f64> = (0..n).map(|_| data.sample(&mut rng)).collect();
        let psi: Vec<f64> = (0..n).map(|_| data.sample(&mut rng)).collect();
        let oracle = enumerate_lcp(&m, &q, &psi);
        let s = LcpSlice::new(SparseOperator::from_dense(&m), q, psi.clone()).unwrap();
        let sol = solve_lcp_psor(&s, &cfg, &psi).unwrap();
        worst = worst.max(sol.u.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        name: "LCP oracle equivalence",
        passed: worst < 1e-8 && secs < 30.0,
        detail: format!("50 instances, worst PSOR vs enumeration gap {worst:.2e} (< 1e-8), {secs:.2} s (< 30 s)"),
    }
}

fn put(_: &[f64], x: &[f64]) -> f64 {
    (1.0 - x[0]).max(0.0)
}

fn stochastic_cross_check() -> Outcome {
    let horizon = 0.25;
    let dom = BoxDomain::new(vec![-2.0], vec![2.0], vec![-0.5], vec![2.5], 0.0, horizon).unwrap();
    let probe = ProbeBox { v_lo: vec![-0.5], v_hi: vec![0.5], x_lo: vec![0.5], x_hi: vec![1.5] };
    let mut gaps = Vec::new();
    let mut finest = None;
    for n in [17, 33, 65] {
        let grid = GridSpec::uniform(dom.clone(), n).unwrap();
        let payoff = ScalarField::from_fn(&grid, |v, x, _| put(v, x));
        let (u, _) = solve(&identity(&grid), &ScalarField::zeros(&grid), &payoff, &payoff, &SolverConfig::default());
        let dp = value_by_dynamic_programming(put, &grid, &DpConfig { gh_order: 8, early_exercise: true }).unwrap();
        gaps.push(compare_with_pde(&u, &dp.value, &probe, n - 1, 5e-2).unwrap().max_gap);
        finest = Some(dp.value);
    }
    let dp = finest.unwrap();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let within = *gaps.last().unwrap() < 5e-2;
    let cfg = LsmcConfig { n_paths: 100_000, n_steps: 64, basis_degree: 3, seed: 6 };
    let mc = lsmc_value(put, &[0.0], &[1.0], horizon, &cfg).unwrap();
    let dp_start = dp.interpolate(&Point::new(vec![0.0], vec![1.0], horizon).unwrap()).unwrap();
    let agree = (mc.value - dp_start).abs() <= 3.0 * mc.standard_error;
    Outcome {
        name: "stochastic cross-check",
        passed: monotone && within && agree,
        detail: format!(
            "PDE/DP max gaps {} (monotone {monotone}, finest < 5e-2); LSMC {:.5} +- {:.5} vs DP {dp_start:.5}: {:.1} SE (<= 3)",
            sci(&gaps),
            mc.value,
            mc.standard_error,
            (mc.value - dp_start).abs() / mc.standard_error
        ),
    }
}

/// Smooth bump supported in `(c - r, c + r)`.
fn bump(v: f64, c: f64, r: f64) -> f64 {
    let s = (v - c) / r;
    if s.abs() < 1.0 {
        (1.0 - s * s).powi(2)
    } else {
        0.0
    }
}

fn poincare() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = GridSpec::new(BoxDomain::unit(1), vec![65], vec![4], 3).unwrap();
    let (centre, amp, noise) = (uniform(0.2, 0.8), uniform(-1.0, 1.0), uniform(0.0, 1.0));
    let mut worst = 0.0f64;
    for k in 0..100 {
        let (c, a, b) = (centre.sample(&mut rng), amp.sample(&mut rng), amp.sample(&mut rng));
        let r = uniform(0.05, c.min(1.0 - c)).sample(&mut rng);
        let rough = k % 2 == 1;
        let mut u = ScalarField::from_fn(&grid, |v, x, t| bump(v[0], c, r) * (a + b * x[0] + t));
        if rough {
            // nodal noise inside the support
            for val in u.values_mut() {
                if *val != 0.0 {
                    *val *= 1.0 + noise.sample(&mut rng);
                }
            }
        }
        worst = worst.max(poincare_ratio(&u).unwrap());
    }
    let fine = GridSpec::new(BoxDomain::unit(1), vec![129], vec![3], 3).unwrap();
    let probe = poincare_ratio(&ScalarField::from_fn(&fine, |v, _, _| (PI * v[0]).sin())).unwrap();
    Outcome {
        name: "Poincare inequality",
        passed: worst <= 1.0 / PI + 0.02 && (probe - 1.0 / PI).abs() <= 1e-3,
        detail: format!(
            "max ratio over 100 fields {worst:.5} (<= {:.5}); sin probe {probe:.6} vs 1/pi {:.6}",
            1.0 / PI + 0.02,
            1.0 / PI
        ),
    }
}

/// Largest stability ratio over 30 random draws on `n³` nodes.
fn worst_stability_ratio(n: usize) -> f64 {
    let grid = GridSpec::uniform(BoxDomain::unit(1), n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = uniform(-1.0, 1.0);
    let mut worst = 0.0f64;
    for draw in 0..30u64 {
        let a = make_coefficients(&CoefficientKind::RandomSpd { lambda: 0.5, big_lambda: 2.0, seed: draw }, &grid).unwrap();
        let k: Vec<f64> = (0..6).map(|_| c.sample(&mut rng)).collect();
        let f = ScalarField::from_fn(&grid, |v, x, t| k[0] * (PI * v[0]).sin() + k[1] * (3.0 * x[0] + t).cos() + k[2]);
        let g = ScalarField::from_fn(&grid, |v, x, t| k[3] * v[0] * x[0] + k[4] * (2.0 * t + v[0]).sin() + k[5]);
        let psi = g.map(|a| a - 0.2);
        let (_, rep) = solve(&a, &f, &psi, &g, &SolverConfig::default());
        worst = worst.max(rep.stability_ratio());
    }
    worst
}

fn stability() -> Outcome {
    let (coarse, fine) = (worst_stability_ratio(32), worst_stability_ratio(64));
    let factor = (fine / coarse).max(coarse / fine);
    Outcome {
        name: "stability estimate",
        passed: coarse.is_finite() && fine.is_finite() && factor < 2.0,
        detail: format!("max ratio 32^3: {coarse:.4}, 64^3: {fine:.4}, change factor {factor:.3} (< 2)"),
    }
}

fn variational_inequality(unit_source: &(Active, ScalarField), variant: &(Active, ScalarField)) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (unit, scale) = (uniform(-1.0, 1.0), uniform(0.01, 1.0));
    let mut worst = [f64::INFINITY; 2];
    for (slot, (p, u)) in [unit_source, variant].into_iter().enumerate() {
        let grid = u.grid();
        for k in 0..100 {
            let amp = scale.sample(&mut rng);
            let (c, r) = (uniform(0.2, 0.8).sample(&mut rng), uniform(0.05, 0.2).sample(&mut rng));
            let mut w = u.clone();
            for node in 0..grid.len() {
                if grid.is_kolmogorov_node(node) {
                    continue;
                }
                let (iv, ix, _) = grid.split(node);
                // alternate rough nodal and smooth bump perturbations
                let delta = if k % 2 == 0 {
                    amp * unit.sample(&mut rng)
                } else {
                    amp * bump(grid.v_coord(iv, 0), c, r) * bump(grid.x_coord(ix, 0), 0.5, 0.4) * unit.sample(&mut rng).signum()
                };
                w.values_mut()[node] = (u.values()[node] + delta).max(p.psi.values()[node]);
            }
            let gap = variational_inequality_gap(u, &w, &p.f, &p.psi, &p.a).unwrap();
            worst[slot] = worst[slot].min(gap);
        }
    }
    Outcome {
        name: "variational inequality",
        passed: worst.iter().all(|&g| g >= -1e-6),
        detail: format!("min gap over 100 competitors f=1: {:.3e}, f=8x-4: {:.3e} (>= -1e-6)", worst[0], worst[1]),
    }
}

/// Dyadic coordinates keep every group operation exact in floating point.
fn dyadic_point(rng: &mut ChaCha8Rng, d: usize) -> Point {
    let k = Uniform::new_inclusive(-64i32, 64).expect("valid range");
    let mut c = || k.sample(rng) as f64 / 16.0;
    let v = (0..d).map(|_| c()).collect();
    let x = (0..d).map(|_| c()).collect();
    Point::new(v, x, c()).unwrap()
}

fn galilean_error(n: usize) -> f64 {
    let exact = |v: &[f64], x: &[f64], t: f64| (v[0] + x[0]).sin() * (-t).exp();
    let rhs = |v: &[f64], x: &[f64], t: f64| v[0] * (v[0] + x[0]).cos() * (-t).exp();
    let z0 = Point::new(vec![0.25], vec![0.125], 0.25).unwrap();
    let shift = |v: &[f64], x: &[f64], t: f64| galilean_shift(&z0, &Point::new(v.to_vec(), x.to_vec(), t).unwrap()).unwrap();
    let grid = GridSpec::uniform(BoxDomain::new(vec![-1.0], vec![1.0], vec![-1.0], vec![1.0], 0.0, 0.5).unwrap(), n).unwrap();
    let a = identity(&grid);
    let psi = ScalarField::constant(&grid, -1e6);
    let cfg = SolverConfig::default();
    let (u, _) = solve(&a, &ScalarField::from_fn(&grid, rhs), &psi, &ScalarField::from_fn(&grid, exact), &cfg);
    let moved = |h: &Data| {
        ScalarField::from_fn(&grid, |v, x, t| {
            let p = shift(v, x, t);
            h(&p.v, &p.x, p.t)
        })
    };
    let (u_moved, _) = solve(&a, &moved(&rhs), &psi, &moved(&exact), &cfg);
    // compare the solution of the translated data with the translate of the
    // solution, where the translated node stays inside the box
    let dom = grid.dom();
    let mut err = 0.0f64;
    for node in 0..grid.len() {
        let p = grid.point(node);
        let q = galilean_shift(&z0, &p).unwrap();
        let inside = q.v[0] <= dom.v_hi[0] && q.x[0] >= dom.x_lo[0] && q.x[0] <= dom.x_hi[0] && q.t <= dom.t_hi;
        if inside {
            err = err.max((u_moved.values()[node] - u.interpolate(&q).unwrap()).abs());
        }
    }
    err
}

fn group_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let radii = [0.25, 0.5, 1.0, 2.0, 4.0];
    let pick = Uniform::new(0usize, radii.len()).expect("valid range");
    let mut failures = 0;
    for k in 0..10_000 {
        let d = 1 + k % 3;
        let (a, b, c) = (dyadic_point(&mut rng, d), dyadic_point(&mut rng, d), dyadic_point(&mut rng, d));
        let left = group_compose(&group_compose(&a, &b).unwrap(), &c).unwrap();
        let right = group_compose(&a, &group_compose(&b, &c).unwrap()).unwrap();
        let e = Point::identity(d);
        let inv_ok = group_compose(&a, &group_inverse(&a)).unwrap() == e && group_compose(&group_inverse(&a), &a).unwrap() == e;
        let (r, s) = (radii[pick.sample(&mut rng)], radii[pick.sample(&mut rng)]);
        let dil_ok = dilate(r, &dilate(s, &a).unwrap()).unwrap() == dilate(r * s, &a).unwrap();
        let hom_ok = dilate(r, &group_compose(&a, &b).unwrap()).unwrap()
            == group_compose(&dilate(r, &a).unwrap(), &dilate(r, &b).unwrap()).unwrap();
        if left != right || !inv_ok || !dil_ok || !hom_ok {
            failures += 1;
        }
    }
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| galilean_error(n)).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        name: "group and dilation algebra",
        passed: failures == 0 && decreasing,
        detail: format!("{failures} exact-identity failures in 10^4 tuples; Galilean invariance errors {}", sci(&errs)),
    }
}

fn run_cli(mode: &str, config: &Path, out: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_kolmo"))
        .args([mode, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--seed", "5"])
        .status()
        .expect("binary runs");
    assert!(status.success(), "{mode} exited with {status}");
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("solve", r#"{"schema_version": 1, "grid": {"n": 9}, "coefficients": {"kind": "random_spd", "lambda": 0.5, "big_lambda": 2}, "f": "8*x - 4", "psi": 0, "g": 0}"#),
        ("verify", r#"{"schema_version": 1, "grid": {"n": 9}, "f": "8*x - 4", "psi": 0, "g": 0, "verify": {"competitors": 5}}"#),
        ("convergence", r#"{"schema_version": 1, "f": "(1 - pi^2)*sin(pi*v)*cos(x)*exp(-t) - v*sin(pi*v)*sin(x)*exp(-t)", "convergence": {"levels": [6, 12], "exact": "sin(pi*v)*cos(x)*exp(-t)"}}"#),
        ("oracle", r#"{"schema_version": 1, "domain": {"v_lo": [-2], "v_hi": [2], "x_lo": [-0.5], "x_hi": [2.5], "t_lo": 0, "t_hi": 0.25},
            "oracle": {"payoff": "max(1 - x, 0)", "levels": [9, 17], "lsmc": {"n_paths": 2000}}}"#),
    ];
    let mut same = Vec::new();
    for (mode, body) in configs {
        let cfg = dir.path().join(format!("{mode}.json"));
        fs::write(&cfg, body).unwrap();
        let (a, b) = (dir.path().join(format!("{mode}-a")), dir.path().join(format!("{mode}-b")));
        run_cli(mode, &cfg, &a);
        run_cli(mode, &cfg, &b);
        same.push((mode, artifacts(&a) == artifacts(&b)));
    }
    Outcome {
        name: "determinism",
        passed: same.iter().all(|s| s.1),
        detail: format!("byte-identical artifacts per mode: {same:?}"),
    }
}

fn main() {
    let start = Instant::now();
    let mms: Vec<(f64, f64, f64)> = [16, 32, 64].iter().map(|&n| mms_level(n)).collect();
    let mms_secs = start.elapsed().as_secs_f64();
    let solved = |f: fn(&[f64], &[f64], f64) -> f64| {
        let p = active_instance(48, f);
        let (u, _) = solve(&p.a, &p.f, &p.psi, &p.g, &SolverConfig::default());
        (p, u)
    };
    let unit_source = solved(|_, _, _| 1.0);
    let variant = solved(free_boundary_source);

    let outcomes = vec![
        manufactured_convergence(&mms, mms_secs),
        zero_minimizer(&mms),
        complementarity(&unit_source, &variant),
        psor_vs_penalty(&unit_source, &variant),
        lcp_oracle(),
        stochastic_cross_check(),
        poincare(),
        stability(),
        variational_inequality(&unit_source, &variant),
        group_algebra(),
        determinism(),
    ];
    let mut failed = 0;
    for (k, o) in outcomes.iter().enumerate() {
        println!("[{}] {:>2}. {}: {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
