use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Exact one-step transition of `dV = √2 dW, dX = V dt` over `dt`, driven by
/// two independent standard normals per component:
/// `ΔV = √(2dt) z1`, `ΔX = V dt + (dt²/√(2dt)) z1 + √(dt³/6) z2`, so that
/// `Var ΔV = 2dt`, `Var(ΔX - V dt) = 2dt³/3` and `Cov = dt²`.
pub fn transition(v: f64, x: f64, dt: f64, z1: f64, z2: f64) -> (f64, f64) {
    let a = (2.0 * dt).sqrt();
    let b = dt * dt / a;
    let c = (dt * dt * dt / 6.0).sqrt();
    (v + a * z1, x + v * dt + b * z1 + c * z2)
}

/// Per-path generator: one ChaCha stream per path, so any subset of paths can
/// be regenerated independently of the others.
pub(crate) fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Advances one path state by `dt` in place.
pub(crate) fn step_state(rng: &mut ChaCha8Rng, v: &mut [f64], x: &mut [f64], dt: f64) {
    for k in 0..v.len() {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let (vn, xn) = transition(v[k], x[k], dt, z1, z2);
        v[k] = vn;
        x[k] = xn;
    }
}

/// Simulated trajectories on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub n_paths: usize,
    pub times: Vec<f64>,
    dim: usize,
    v: Vec<f64>,
    x: Vec<f64>,
}

impl PathBatch {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }
    fn offset(&self, path: usize, step: usize) -> usize {
        (path * self.times.len() + step) * self.dim
    }
    pub fn v(&self, path: usize, step: usize) -> &[f64] {
        let o = self.offset(path, step);
        &self.v[o..o + self.dim]
    }
    pub fn x(&self, path: usize, step: usize) -> &[f64] {
        let o = self.offset(path, step);
        &self.x[o..o + self.dim]
    }
}

/// Samples `n_paths` trajectories from `(v0, x0)` at `t0` to `t_end` with
/// exact Gaussian steps. Path `p` uses stream `p` of the seeded generator.
pub fn simulate_paths(
    v0: &[f64],
    x0: &[f64],
    t0: f64,
    t_end: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    if v0.len() != x0.len() || v0.is_empty() {
        return Err(Error::DimensionMismatch { expected: v0.len(), found: x0.len() });
    }
    if n_paths == 0 {
        return Err(Error::InvalidSampling("at least one path is required".into()));
    }
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidSampling("the horizon must exceed the start time".into()));
    }
    let d = v0.len();
    let dt = if n_steps == 0 { 0.0 } else { (t_end - t0) / n_steps as f64 };
    let times = (0..=n_steps).map(|k| t0 + k as f64 * dt).collect();
    let len = n_paths * (n_steps + 1) * d;
    let mut batch = PathBatch { n_paths, times, dim: d, v: Vec::with_capacity(len), x: Vec::with_capacity(len) };
    let mut v = v0.to_vec();
    let mut x = x0.to_vec();
    for p in 0..n_paths {
        let mut rng = path_rng(seed, p as u64);
        v.copy_from_slice(v0);
        x.copy_from_slice(x0);
        batch.v.extend_from_slice(&v);
        batch.x.extend_from_slice(&x);
        for _ in 0..n_steps {
            step_state(&mut rng, &mut v, &mut x, dt);
            batch.v.extend_from_slice(&v);
            batch.x.extend_from_slice(&x);
        }
    }
    Ok(batch)
}
