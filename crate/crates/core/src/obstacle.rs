//! Linear complementarity solvers for a single implicit step and the
//! time march of the full obstacle problem.

use alloc::vec::Vec;

use crate::assembly::{assemble_diffusion, assemble_transport, combine_step, LcpSlice, LevelLayout};
use crate::coefficients::CoefficientField;
use crate::fields::{norm_hm1_v, norm_w, ScalarField};
use crate::linalg::BandedLu;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Psor,
    Penalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub omega: f64,
    pub tol: f64,
    /// Sweep cap for PSOR; `None` means ten times the slice dimension.
    pub max_iter: Option<usize>,
    pub epsilon_penalty: f64,
    pub newton_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Psor,
            omega: 1.5,
            tol: 1e-8,
            max_iter: None,
            epsilon_penalty: 1e-8,
            newton_max: 50,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::InvalidConfig(alloc::format!("omega must lie in (0, 2), got {}", self.omega)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if !(self.epsilon_penalty > 0.0) {
            return Err(Error::InvalidConfig("epsilon_penalty must be positive".into()));
        }
        if self.max_iter == Some(0) || self.newton_max == 0 {
            return Err(Error::InvalidConfig("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub complementarity: f64,
}

/// `max_i |min((M u - q)_i, u_i - ψ_i)|`.
pub fn complementarity_residual(s: &LcpSlice, u: &[f64]) -> f64 {
    s.residual(u).iter().zip(u.iter().zip(&s.psi)).map(|(r, (ui, pi))| r.min(ui - pi).abs()).fold(0.0, f64::max)
}

/// Projected SOR from the start `u0` (projected onto `u ≥ ψ` first).
pub fn solve_lcp_psor(s: &LcpSlice, cfg: &SolverConfig, u0: &[f64]) -> Result<LcpSolution> {
    cfg.validate()?;
    let n = s.dim();
    if u0.len() != n {
        return Err(Error::ShapeMismatch("initial iterate has the wrong length".into()));
    }
    let diag = s.m.diagonal();
    if let Some(row) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::SingularSystem { row, pivot: diag[row] });
    }
    let mut u: Vec<f64> = u0.iter().zip(&s.psi).map(|(a, b)| a.max(*b)).collect();
    let max_iter = cfg.max_iter.unwrap_or(10 * n.max(1));
    let mut residual = complementarity_residual(s, &u);
    let mut iterations = 0;
    while residual > cfg.tol {
        if iterations == max_iter {
            return Err(Error::NoConvergence { iterations, residual });
        }
        for i in 0..n {
            let mu: f64 = s.m.row(i).map(|(j, a)| a * u[j]).sum();
            u[i] = s.psi[i].max(u[i] + cfg.omega * (s.q[i] - mu) / diag[i]);
        }
        iterations += 1;
        residual = complementarity_residual(s, &u);
    }
    Ok(LcpSolution { u, iterations, complementarity: residual })
}

/// Semismooth Newton on `M u + (1/ε) min(u - ψ, 0) = q`. Each step solves
/// with the penalty switched on where the current iterate lies below `ψ`;
/// the iteration stops once that set repeats.
pub fn solve_lcp_penalized(s: &LcpSlice, cfg: &SolverConfig) -> Result<LcpSolution> {
    cfg.validate()?;
    let n = s.dim();
    let inv_eps = 1.0 / cfg.epsilon_penalty;
    let mut u = BandedLu::factor(&s.m)?.solve(&s.q);
    let mut active: Vec<bool> = u.iter().zip(&s.psi).map(|(a, b)| a < b).collect();
    for step in 1..=cfg.newton_max {
        let shift: Vec<f64> = active.iter().map(|&a| if a { inv_eps } else { 0.0 }).collect();
        let mut rhs = s.q.clone();
        for i in 0..n {
            rhs[i] += shift[i] * s.psi[i];
        }
        BandedLu::factor(&s.m.add_diagonal(&shift))?.solve_in_place(&mut rhs);
        u = rhs;
        let next: Vec<bool> = u.iter().zip(&s.psi).map(|(a, b)| a < b).collect();
        if next == active {
            let complementarity = complementarity_residual(s, &u);
            return Ok(LcpSolution { u, iterations: step, complementarity });
        }
        active = next;
    }
    Err(Error::NoConvergence { iterations: cfg.newton_max, residual: complementarity_residual(s, &u) })
}

/// Largest excess `ψ - g` over the Kolmogorov boundary, if any node has
/// `g - ψ < -1e-12`.
pub fn ordering_violation(psi: &ScalarField, g: &ScalarField) -> Result<Option<(usize, f64)>> {
    psi.check_same_grid(g)?;
    let grid = g.grid();
    let mut worst: Option<(usize, f64)> = None;
    for node in 0..grid.len() {
        let excess = psi.values()[node] - g.values()[node];
        if excess > 1e-12 && grid.is_kolmogorov_node(node) && worst.is_none_or(|(_, e)| excess > e) {
            worst = Some((node, excess));
        }
    }
    Ok(worst)
}

/// `ψ ≤ g` at every Kolmogorov-boundary node, up to `1e-12`.
pub fn check_ordering(psi: &ScalarField, g: &ScalarField) -> bool {
    matches!(ordering_violation(psi, g), Ok(None))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Solver iterations per time level `1..n_t`.
    pub iterations: Vec<usize>,
    /// Worst complementarity residual over all levels.
    pub complementarity_residual: f64,
    /// Worst `|M u - q|` at nodes strictly above the obstacle.
    pub linear_residual: f64,
    /// `min(u - ψ)` over all nodes.
    pub min_obstacle_gap: f64,
    pub norm_w_u: f64,
    pub norm_w_g: f64,
    pub norm_f_hm1: f64,
}

impl SolveReport {
    /// `‖u‖_W / (‖g‖_W + ‖f‖_{L²H⁻¹})`, infinite when the data vanish.
    pub fn stability_ratio(&self) -> f64 {
        let data = self.norm_w_g + self.norm_f_hm1;
        if data > 0.0 {
            self.norm_w_u / data
        } else if self.norm_w_u == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

enum Step<'a> {
    Obstacle(&'a SolverConfig),
    Linear,
}

fn check_inputs(a: &CoefficientField, f: &ScalarField, g: &ScalarField, psi: Option<&ScalarField>) -> Result<()> {
    a.require_elliptic()?;
    let grid = a.grid();
    for field in [Some(f), Some(g), psi].into_iter().flatten() {
        if field.grid() != grid {
            return Err(Error::ShapeMismatch("data and coefficients live on different grids".into()));
        }
    }
    Ok(())
}

fn march_levels(
    a: &CoefficientField,
    f: &ScalarField,
    psi: &ScalarField,
    g: &ScalarField,
    step: Step<'_>,
) -> Result<(ScalarField, Vec<usize>, f64, f64)> {
    let grid = a.grid();
    let layout = LevelLayout::new(grid);
    let transport = assemble_transport(grid);
    let ll = grid.level_len();
    let mut u = g.clone();
    let mut iterations = Vec::with_capacity(grid.n_t() - 1);
    let (mut comp, mut lin) = (0.0f64, 0.0f64);
    let mut linear_lu: Option<BandedLu> = None;
    let time_invariant = (0..ll).all(|ln| (1..grid.n_t()).all(|it| a.matrix(ln + it * ll) == a.matrix(ln)));
    for it in 1..grid.n_t() {
        let diffusion = assemble_diffusion(a, it)?;
        let prev = u.level(it - 1).to_vec();
        let slice = combine_step(grid, &layout, &diffusion, &transport, it, &prev, f, g, psi);
        let sol = match step {
            Step::Obstacle(cfg) => {
                let warm: Vec<f64> = slice.unknowns.iter().map(|&ln| prev[ln]).collect();
                let sol = match cfg.method {
                    Method::Psor => solve_lcp_psor(&slice, cfg, &warm)?,
                    Method::Penalized => solve_lcp_penalized(&slice, cfg)?,
                };
                comp = comp.max(sol.complementarity);
                let r = slice.residual(&sol.u);
                for i in 0..slice.dim() {
                    if sol.u[i] - slice.psi[i] > cfg.tol {
                        lin = lin.max(r[i].abs());
                    }
                }
                sol
            }
            Step::Linear => {
                if linear_lu.is_none() || !time_invariant {
                    linear_lu = Some(BandedLu::factor(&slice.m)?);
                }
                let u_new = linear_lu.as_ref().map(|lu| lu.solve(&slice.q)).unwrap_or_default();
                let r = slice.residual(&u_new);
                lin = lin.max(r.iter().fold(0.0, |m, x| m.max(x.abs())));
                LcpSolution { u: u_new, iterations: 1, complementarity: 0.0 }
            }
        };
        iterations.push(sol.iterations);
        let level = u.level_mut(it);
        for (&ln, &val) in slice.unknowns.iter().zip(&sol.u) {
            level[ln] = val;
        }
    }
    Ok((u, iterations, comp, lin))
}

fn report(
    u: &ScalarField,
    f: &ScalarField,
    psi: &ScalarField,
    g: &ScalarField,
    iterations: Vec<usize>,
    comp: f64,
    lin: f64,
) -> Result<SolveReport> {
    let min_obstacle_gap = u.values().iter().zip(psi.values()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    Ok(SolveReport {
        iterations,
        complementarity_residual: comp,
        linear_residual: lin,
        min_obstacle_gap,
        norm_w_u: norm_w(u)?,
        norm_w_g: norm_w(g)?,
        norm_f_hm1: norm_hm1_v(f)?,
    })
}

/// Marches the obstacle problem from `t_lo`: `u = g` on the Kolmogorov
/// boundary (the whole first level included), and one complementarity
/// problem per later level, warm-started from the previous level.
pub fn march(
    a: &CoefficientField,
    f: &ScalarField,
    psi: &ScalarField,
    g: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolveReport)> {
    cfg.validate()?;
    check_inputs(a, f, g, Some(psi))?;
    if let Some((node, excess)) = ordering_violation(psi, g)? {
        return Err(Error::OrderingViolation { node, excess });
    }
    let (u, iterations, comp, lin) = march_levels(a, f, psi, g, Step::Obstacle(cfg))?;
    let rep = report(&u, f, psi, g, iterations, comp, lin)?;
    Ok((u, rep))
}

/// The unconstrained problem `𝓛u = f`, `u = g` on the Kolmogorov boundary.
pub fn solve_dirichlet(a: &CoefficientField, f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    Ok(solve_dirichlet_with_report(a, f, g)?.0)
}

pub fn solve_dirichlet_with_report(
    a: &CoefficientField,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<(ScalarField, SolveReport)> {
    check_inputs(a, f, g, None)?;
    let psi = ScalarField::constant(g.grid(), -f64::MAX);
    let (u, iterations, _, lin) = march_levels(a, f, &psi, g, Step::Linear)?;
    let mut rep = report(&u, f, &psi, g, iterations, 0.0, lin)?;
    rep.min_obstacle_gap = f64::INFINITY;
    Ok((u, rep))
}

/// Brute-force LCP solution by enumerating every active set; for small
/// test problems only (`n ≤ 20`).
pub fn solve_lcp_enumerate(s: &LcpSlice, tol: f64) -> Result<Vec<f64>> {
    let n = s.dim();
    if n > 20 {
        return Err(Error::Unsupported("enumeration is limited to 20 unknowns".into()));
    }
    let dense: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| s.m.get(i, j)).collect()).collect();
    for mask in 0u32..(1 << n) {
        let free: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        let mut u = s.psi.clone();
        if !free.is_empty() {
            let sub: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| dense[i][j]).collect()).collect();
            let mut rhs: Vec<f64> = free
                .iter()
                .map(|&i| s.q[i] - (0..n).filter(|j| mask & (1 << j) != 0).map(|j| dense[i][j] * s.psi[j]).sum::<f64>())
                .collect();
            let Ok(lu) = BandedLu::factor(&crate::linalg::SparseOperator::from_dense(&sub)) else { continue };
            lu.solve_in_place(&mut rhs);
            for (&i, &x) in free.iter().zip(&rhs) {
                u[i] = x;
            }
        }
        let r = s.residual(&u);
        let ok = (0..n).all(|i| if mask & (1 << i) == 0 { u[i] >= s.psi[i] - tol } else { r[i] >= -tol });
        if ok {
            return Ok(u);
        }
    }
    Err(Error::NoConvergence { iterations: 1 << n, residual: f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{make_coefficients, CoefficientKind};
    use crate::fields::GridSpec;
    use crate::geometry::BoxDomain;
    use crate::linalg::SparseOperator;
    use proptest::prelude::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Random strictly diagonally dominant M-matrix LCP.
    fn random_lcp(seed: u64, n: usize) -> LcpSlice {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                if i != j && uniform01(&mut rng) < 0.5 {
                    rows[i][j] = -uniform01(&mut rng);
                    off -= rows[i][j];
                }
            }
            rows[i][i] = off + 0.1 + uniform01(&mut rng);
        }
        let q = (0..n).map(|_| 2.0 * uniform01(&mut rng) - 1.0).collect();
        let psi = (0..n).map(|_| uniform01(&mut rng) - 0.5).collect();
        LcpSlice::new(SparseOperator::from_dense(&rows), q, psi).unwrap()
    }

    fn tight() -> SolverConfig {
        // Gauss-Seidel: over-relaxation need not converge on weakly dominant random M-matrices
        SolverConfig { omega: 1.0, tol: 1e-12, max_iter: Some(100_000), ..SolverConfig::default() }
    }

    #[test]
    fn trivial_lcps() {
        let m = SparseOperator::identity(4);
        let s = LcpSlice::new(m.clone(), vec![0.0; 4], vec![-1e6; 4]).unwrap();
        let u = solve_lcp_psor(&s, &SolverConfig::default(), &[5.0; 4]).unwrap().u;
        assert!(u.iter().all(|&x| x.abs() < 1e-8));
        let s = LcpSlice::new(m, vec![0.0; 4], vec![1.0; 4]).unwrap();
        let u = solve_lcp_psor(&s, &SolverConfig::default(), &[1.0; 4]).unwrap().u;
        assert!(u.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn psor_and_newton_match_enumeration() {
        for seed in 0..10 {
            let s = random_lcp(seed, 10);
            let exact = solve_lcp_enumerate(&s, 1e-10).unwrap();
            let p = solve_lcp_psor(&s, &tight(), &s.psi).unwrap().u;
            let pen = solve_lcp_penalized(&s, &SolverConfig { epsilon_penalty: 1e-8, ..tight() }).unwrap().u;
            for i in 0..10 {
                assert!((p[i] - exact[i]).abs() < 1e-8, "seed {seed}");
                assert!((pen[i] - p[i]).abs() < 1e-6, "seed {seed}");
            }
        }
    }

    #[test]
    fn penalty_violation_shrinks_with_epsilon() {
        let s = random_lcp(42, 10);
        let mut last = f64::INFINITY;
        let mut eps = 1e-2;
        for _ in 0..6 {
            let u = solve_lcp_penalized(&s, &SolverConfig { epsilon_penalty: eps, ..tight() }).unwrap().u;
            let v: f64 = u.iter().zip(&s.psi).map(|(a, b)| (a - b).min(0.0).powi(2)).sum::<f64>().sqrt();
            assert!(v <= last, "violation grew: {v} > {last}");
            last = v;
            eps *= 0.5;
        }
    }

    #[test]
    fn penalized_without_obstacle_is_linear_solve() {
        let mut s = random_lcp(7, 10);
        s.psi = vec![-1e6; 10];
        let lin = BandedLu::factor(&s.m).unwrap().solve(&s.q);
        let pen = solve_lcp_penalized(&s, &SolverConfig::default()).unwrap().u;
        assert!(lin.iter().zip(&pen).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn psor_reports_non_convergence() {
        let s = random_lcp(3, 10);
        let cfg = SolverConfig { max_iter: Some(1), tol: 1e-14, ..SolverConfig::default() };
        assert!(matches!(solve_lcp_psor(&s, &cfg, &[0.0; 10]), Err(Error::NoConvergence { .. })));
    }

    fn grid(n: usize) -> GridSpec {
        let dom = BoxDomain::new(vec![-1.0], vec![1.0], vec![0.0], vec![1.0], 0.0, 1.0).unwrap();
        GridSpec::uniform(dom, n).unwrap()
    }

    #[test]
    fn ordering_examples() {
        let g = grid(5);
        let zero = ScalarField::zeros(&g);
        let one = ScalarField::constant(&g, 1.0);
        assert!(check_ordering(&zero, &one));
        assert!(!check_ordering(&one, &zero));
        assert!(check_ordering(&one, &one));
        let a = make_coefficients(&CoefficientKind::Identity, &g).unwrap();
        assert!(matches!(march(&a, &zero, &one, &zero, &SolverConfig::default()), Err(Error::OrderingViolation { .. })));
    }

    #[test]
    fn march_trivial_cases() {
        let g = grid(9);
        let a = make_coefficients(&CoefficientKind::Identity, &g).unwrap();
        let zero = ScalarField::zeros(&g);
        let one = ScalarField::constant(&g, 1.0);
        let (u, rep) = march(&a, &zero, &zero, &one, &SolverConfig::default()).unwrap();
        assert!(u.values().iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(rep.complementarity_residual <= 1e-8);

        let (u, rep) = march(&a, &one, &zero, &zero, &SolverConfig::default()).unwrap();
        assert!(u.values().iter().all(|&x| x.abs() < 1e-12));
        assert!(rep.complementarity_residual <= 1e-8);
        // the unconstrained solution dips below zero
        let free = solve_dirichlet(&a, &one, &zero).unwrap();
        assert!(free.values().iter().all(|&x| x <= 1e-14));
        assert!(free.values().iter().any(|&x| x < -1e-3));
    }

    #[test]
    fn degenerate_obstacle_matches_dirichlet() {
        let g = grid(9);
        let a = make_coefficients(&CoefficientKind::RandomSpd { lambda: 0.5, big_lambda: 2.0, seed: 5 }, &g).unwrap();
        let f = ScalarField::from_fn(&g, |v, x, t| (3.0 * v[0]).sin() + x[0] * t);
        let bc = ScalarField::from_fn(&g, |v, x, _| v[0] * x[0] + 0.5);
        let psi = ScalarField::constant(&g, -1e6);
        let cfg = SolverConfig { tol: 1e-12, ..SolverConfig::default() };
        let (u, _) = march(&a, &f, &psi, &bc, &cfg).unwrap();
        let (pen, _) = march(&a, &f, &psi, &bc, &SolverConfig { method: Method::Penalized, ..cfg }).unwrap();
        let free = solve_dirichlet(&a, &f, &bc).unwrap();
        assert!(u.max_abs_diff(&free).unwrap() < 1e-10);
        assert!(pen.max_abs_diff(&free).unwrap() < 1e-10);
    }

    #[test]
    fn psor_starts_converge_to_same_solution() {
        let s = random_lcp(9, 10);
        let cfg = SolverConfig { tol: 1e-10, max_iter: Some(10_000), ..SolverConfig::default() };
        let a = solve_lcp_psor(&s, &cfg, &s.psi).unwrap().u;
        let b = solve_lcp_psor(&s, &cfg, &[10.0; 10]).unwrap().u;
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 10.0 * cfg.tol));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn raising_boundary_data_never_lowers_solution(seed in 0u64..1000, bump in 0.0f64..1.0) {
            let g = grid(7);
            let a = make_coefficients(&CoefficientKind::Identity, &g).unwrap();
            let s = seed as f64;
            let f = ScalarField::from_fn(&g, |v, x, t| (s + 2.0 * v[0] + x[0] - t).sin());
            let psi = ScalarField::from_fn(&g, |v, x, _| 0.3 * (s * 0.1 + v[0] - x[0]).cos() - 0.6);
            let g1 = ScalarField::from_fn(&g, |v, x, t| (s * 0.3 + v[0] * x[0] + t).cos().max(psi_at(s, v[0], x[0])));
            let g2 = ScalarField::from_fn(&g, |v, x, t| {
                (s * 0.3 + v[0] * x[0] + t).cos().max(psi_at(s, v[0], x[0])) + bump * (1.0 + v[0] * t).abs()
            });
            let cfg = SolverConfig::default();
            let (u1, _) = march(&a, &f, &psi, &g1, &cfg).unwrap();
            let (u2, _) = march(&a, &f, &psi, &g2, &cfg).unwrap();
            for (x, y) in u1.values().iter().zip(u2.values()) {
                prop_assert!(y - x >= -1e-7);
            }
        }
    }

    fn psi_at(s: f64, v: f64, x: f64) -> f64 {
        0.3 * (s * 0.1 + v - x).cos() - 0.6
    }
}
