use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::paths::{path_rng, simulate_paths, step_state};
use crate::geometry::{BoxDomain, Point};
use crate::linalg::cholesky_solve;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LsmcConfig {
    pub n_paths: usize,
    /// Exercise dates, evenly spaced over the horizon (the last is the horizon).
    pub n_steps: usize,
    pub basis_degree: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingValue {
    pub value: f64,
    pub standard_error: f64,
    pub n_paths: usize,
    /// Lowest polynomial degree actually used by any regression.
    pub basis_degree: usize,
    /// Set when a regression was rank deficient and fell back to a lower degree.
    pub rank_reduced: bool,
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exponent vectors of all monomials of total degree `≤ degree` in `m`
/// variables, constant first.
fn monomials(m: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; m]];
    let mut frontier = out.clone();
    for _ in 0..degree {
        let mut next = Vec::new();
        for e in &frontier {
            // extend only at or after the last raised variable, so each
            // monomial is produced once
            let start = e.iter().rposition(|&p| p > 0).unwrap_or(0);
            for k in start..m {
                let mut f = e.clone();
                f[k] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Fitted continuation value at one exercise date.
struct Regression {
    mean: Vec<f64>,
    scale: Vec<f64>,
    basis: Vec<Vec<u32>>,
    coef: Vec<f64>,
}

impl Regression {
    fn features(&self, z: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for e in &self.basis {
            let mut val = 1.0;
            for (k, &p) in e.iter().enumerate() {
                if p > 0 {
                    val *= ((z[k] - self.mean[k]) / self.scale[k]).powi(p as i32);
                }
            }
            out.push(val);
        }
    }

    fn predict(&self, z: &[f64], buf: &mut Vec<f64>) -> f64 {
        self.features(z, buf);
        buf.iter().zip(&self.coef).map(|(a, b)| a * b).sum()
    }

    /// Least squares through the normal equations; lowers the degree until
    /// the Gram matrix is numerically positive definite.
    fn fit(states: &[Vec<f64>], targets: &[f64], degree: usize) -> (Self, usize) {
        let m = states[0].len();
        let n = states.len() as f64;
        let mut mean = vec![0.0; m];
        for s in states {
            for k in 0..m {
                mean[k] += s[k] / n;
            }
        }
        let mut scale = vec![0.0; m];
        for s in states {
            for k in 0..m {
                scale[k] += (s[k] - mean[k]).powi(2) / n;
            }
        }
        for sc in scale.iter_mut() {
            *sc = if *sc > 1e-24 { sc.sqrt() } else { 1.0 };
        }
        let mut deg = degree;
        loop {
            let basis = monomials(m, deg);
            let nb = basis.len();
            let mut reg = Regression { mean: mean.clone(), scale: scale.clone(), basis, coef: Vec::new() };
            let mut gram = vec![0.0; nb * nb];
            let mut rhs = vec![0.0; nb];
            let mut f = Vec::with_capacity(nb);
            for (s, &y) in states.iter().zip(targets) {
                reg.features(s, &mut f);
                for i in 0..nb {
                    rhs[i] += f[i] * y;
                    for j in 0..=i {
                        gram[i * nb + j] += f[i] * f[j];
                    }
                }
            }
            for i in 0..nb {
                for j in 0..i {
                    gram[j * nb + i] = gram[i * nb + j];
                }
            }
            if let Some(coef) = cholesky_solve(&gram, &rhs, nb, 1e-10).filter(|_| states.len() >= nb) {
                reg.coef = coef;
                return (reg, deg);
            }
            if deg == 0 {
                // a single constant is always solvable from a nonempty sample
                reg.coef = vec![targets.iter().sum::<f64>() / n];
                return (reg, 0);
            }
            deg -= 1;
        }
    }
}

/// Longstaff-Schwartz estimate of `sup_τ E[ψ(Z_τ)]` from `(v0, x0)` over
/// `horizon`, exercising on `n_steps` evenly spaced dates. Continuation
/// values are regressed on in-the-money paths (`ψ > 0`) of one path set;
/// the value is then estimated on an independent set with the fitted rule,
/// which makes it biased low.
pub fn lsmc_value<P>(payoff: P, v0: &[f64], x0: &[f64], horizon: f64, cfg: &LsmcConfig) -> Result<StoppingValue>
where
    P: Fn(&[f64], &[f64]) -> f64,
{
    if cfg.basis_degree == 0 {
        return Err(Error::InvalidSampling("basis degree must be at least 1".into()));
    }
    if cfg.n_steps == 0 || cfg.n_paths < 2 {
        return Err(Error::InvalidSampling("need at least one step and two paths".into()));
    }
    let d = v0.len();
    let n = cfg.n_paths;
    let steps = cfg.n_steps;
    let batch = simulate_paths(v0, x0, 0.0, horizon, steps, n, cfg.seed)?;
    let mut cash: Vec<f64> = (0..n).map(|p| payoff(batch.v(p, steps), batch.x(p, steps))).collect();
    let mut rules: Vec<Option<Regression>> = (0..steps).map(|_| None).collect();
    let mut min_degree = cfg.basis_degree;
    let mut state = vec![0.0; 2 * d];
    for k in (1..steps).rev() {
        let mut states = Vec::new();
        let mut targets = Vec::new();
        let mut itm = Vec::new();
        for p in 0..n {
            let psi = payoff(batch.v(p, k), batch.x(p, k));
            if psi > 0.0 {
                state[..d].copy_from_slice(batch.v(p, k));
                state[d..].copy_from_slice(batch.x(p, k));
                states.push(state.clone());
                targets.push(cash[p]);
                itm.push((p, psi));
            }
        }
        if states.is_empty() {
            continue;
        }
        let (reg, deg) = Regression::fit(&states, &targets, cfg.basis_degree);
        min_degree = min_degree.min(deg);
        let mut buf = Vec::new();
        for (s, &(p, psi)) in states.iter().zip(&itm) {
            if psi >= reg.predict(s, &mut buf) {
                cash[p] = psi;
            }
        }
        rules[k] = Some(reg);
    }
    let dt = horizon / steps as f64;
    let mut samples = Vec::with_capacity(n);
    let (mut v, mut x) = (vec![0.0; d], vec![0.0; d]);
    let mut buf = Vec::new();
    for p in 0..n {
        let mut rng = path_rng(cfg.seed, (n + p) as u64);
        v.copy_from_slice(v0);
        x.copy_from_slice(x0);
        let mut realized = None;
        for k in 1..=steps {
            step_state(&mut rng, &mut v, &mut x, dt);
            let psi = payoff(&v, &x);
            if k == steps {
                realized = Some(psi);
            } else if let (true, Some(reg)) = (psi > 0.0, &rules[k]) {
                state[..d].copy_from_slice(&v);
                state[d..].copy_from_slice(&x);
                if psi >= reg.predict(&state, &mut buf) {
                    realized = Some(psi);
                    break;
                }
            }
        }
        samples.push(realized.unwrap_or(0.0));
    }
    let (mean, se) = mean_and_se(&samples);
    let now = payoff(v0, x0);
    let (value, standard_error) = if now > mean { (now, 0.0) } else { (mean, se) };
    Ok(StoppingValue {
        value,
        standard_error,
        n_paths: n,
        basis_degree: min_degree,
        rank_reduced: min_degree < cfg.basis_degree,
    })
}

/// Plain Monte-Carlo `E[ψ(Z_T)]` (no early exercise) with one exact step.
pub fn european_value<P>(payoff: P, v0: &[f64], x0: &[f64], horizon: f64, n_paths: usize, seed: u64) -> Result<StoppingValue>
where
    P: Fn(&[f64], &[f64]) -> f64,
{
    let batch = simulate_paths(v0, x0, 0.0, horizon, 1, n_paths, seed)?;
    let samples: Vec<f64> = (0..n_paths).map(|p| payoff(batch.v(p, 1), batch.x(p, 1))).collect();
    let (value, standard_error) = mean_and_se(&samples);
    Ok(StoppingValue { value, standard_error, n_paths, basis_degree: 0, rank_reduced: false })
}

/// Monte-Carlo Feynman-Kac value of the Dirichlet problem `𝓛u = 0` on
/// `dom` with data `g` at `start`. The process runs with the solver's time
/// decreasing, and `g` is evaluated at the first monitored state outside
/// the open box in `v` or `x`, or at `t_lo`. Exits are detected only at the
/// `n_steps` monitoring dates, so `g` must be defined slightly beyond the box.
pub fn dirichlet_exit_value<G>(
    g: G,
    dom: &BoxDomain,
    start: &Point,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<StoppingValue>
where
    G: Fn(&Point) -> f64,
{
    if start.dim() != dom.dim() {
        return Err(Error::DimensionMismatch { expected: dom.dim(), found: start.dim() });
    }
    if n_steps == 0 || n_paths < 2 {
        return Err(Error::InvalidSampling("need at least one step and two paths".into()));
    }
    let span = start.t - dom.t_lo;
    if !(span > 0.0) {
        return Err(Error::InvalidSampling("start must lie after t_lo".into()));
    }
    let dt = span / n_steps as f64;
    let d = dom.dim();
    let outside = |v: &[f64], x: &[f64]| {
        (0..d).any(|k| v[k] <= dom.v_lo[k] || v[k] >= dom.v_hi[k] || x[k] <= dom.x_lo[k] || x[k] >= dom.x_hi[k])
    };
    let mut samples = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let mut rng = path_rng(seed, p as u64);
        let (mut v, mut x) = (start.v.clone(), start.x.clone());
        let mut t = start.t;
        for k in 1..=n_steps {
            step_state(&mut rng, &mut v, &mut x, dt);
            t = if k == n_steps { dom.t_lo } else { start.t - k as f64 * dt };
            if outside(&v, &x) {
                break;
            }
        }
        samples.push(g(&Point { v, x, t }));
    }
    let (value, standard_error) = mean_and_se(&samples);
    Ok(StoppingValue { value, standard_error, n_paths, basis_degree: 0, rank_reduced: false })
}
