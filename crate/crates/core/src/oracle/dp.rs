use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::paths::transition;
use super::quadrature::gauss_hermite;
use super::PAYOFF_CLIP;
use crate::fields::{GridSpec, ScalarField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    /// Gauss-Hermite points per normal variable.
    pub gh_order: usize,
    /// `false` drops the `max` with the payoff (a European claim).
    pub early_exercise: bool,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig { gh_order: 8, early_exercise: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpResult {
    /// Level `k` holds the value with `k` steps to the horizon.
    pub value: ScalarField,
    /// Number of grid nodes whose payoff was clipped to `±PAYOFF_CLIP`.
    pub clipped: usize,
}

impl DpResult {
    /// Value at the start of the stopping problem (the last level).
    pub fn initial_level(&self) -> &[f64] {
        self.value.level(self.value.grid().n_t() - 1)
    }
}

/// Multilinear interpolation of one time level at `(v, x)`, clamped to the
/// grid box.
struct LevelInterp {
    lo: Vec<f64>,
    h: Vec<f64>,
    n: Vec<usize>,
    stride: Vec<usize>,
}

impl LevelInterp {
    fn new(grid: &GridSpec) -> Self {
        let d = grid.dim();
        let dom = grid.dom();
        let mut lo = dom.v_lo.clone();
        lo.extend_from_slice(&dom.x_lo);
        let mut h = grid.h_v().to_vec();
        h.extend_from_slice(grid.h_x());
        let mut n = grid.n_v().to_vec();
        n.extend_from_slice(grid.n_x());
        let vc = grid.v_count();
        let mut stride = grid.v_strides().to_vec();
        stride.extend(grid.x_strides().iter().map(|s| s * vc));
        debug_assert_eq!(lo.len(), 2 * d);
        LevelInterp { lo, h, n, stride }
    }

    fn eval(&self, level: &[f64], coords: &[f64], base: &mut [usize], frac: &mut [f64]) -> f64 {
        let m = coords.len();
        for a in 0..m {
            let s = ((coords[a] - self.lo[a]) / self.h[a]).clamp(0.0, (self.n[a] - 1) as f64);
            let i = (s.floor() as usize).min(self.n[a] - 2);
            base[a] = i;
            frac[a] = s - i as f64;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << m) {
            let mut w = 1.0;
            let mut idx = 0;
            for a in 0..m {
                if corner & (1 << a) != 0 {
                    w *= frac[a];
                    idx += (base[a] + 1) * self.stride[a];
                } else {
                    w *= 1.0 - frac[a];
                    idx += base[a] * self.stride[a];
                }
            }
            if w != 0.0 {
                total += w * level[idx];
            }
        }
        total
    }
}

/// Backward induction for `sup_τ E[ψ(Z_τ)]` on the `(v, x)` nodes of
/// `grid`, with one exact Gaussian transition per time step: level `0` is
/// `ψ`, level `k` is `max(ψ, E[u_{k-1}(Z_{Δ})])`. The expectation uses a
/// tensor Gauss-Hermite rule in the `2d` normals and multilinear
/// interpolation, with queries outside the box clamped onto it.
pub fn value_by_dynamic_programming<P>(payoff: P, grid: &GridSpec, cfg: &DpConfig) -> Result<DpResult>
where
    P: Fn(&[f64], &[f64]) -> f64,
{
    let d = grid.dim();
    let (z, w) = gauss_hermite(cfg.gh_order)?;
    let q = z.len();
    let combos = q.checked_pow(2 * d as u32).filter(|&c| c <= 1 << 20).ok_or_else(|| {
        Error::Unsupported("Gauss-Hermite tensor rule too large for this dimension".into())
    })?;
    let ll = grid.level_len();
    let vc = grid.v_count();
    let mut clipped = 0;
    let mut psi = Vec::with_capacity(ll);
    for ln in 0..ll {
        let p = payoff(&grid.v_point(ln % vc), &grid.x_point(ln / vc));
        if !p.is_finite() || p.abs() > PAYOFF_CLIP {
            clipped += 1;
        }
        let p = if p.is_nan() { 0.0 } else { p.clamp(-PAYOFF_CLIP, PAYOFF_CLIP) };
        psi.push(p);
    }
    // the tensor rule as (weight, z1 per axis, z2 per axis)
    let mut rule: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(combos);
    for c in 0..combos {
        let mut rem = c;
        let mut weight = 1.0;
        let mut z1 = vec![0.0; d];
        let mut z2 = vec![0.0; d];
        for k in 0..d {
            for target in [&mut z1[k], &mut z2[k]] {
                let i = rem % q;
                rem /= q;
                weight *= w[i];
                *target = z[i];
            }
        }
        rule.push((weight, z1, z2));
    }
    let dt = grid.h_t();
    let interp = LevelInterp::new(grid);
    let mut values = Vec::with_capacity(grid.len());
    values.extend_from_slice(&psi);
    let mut coords = vec![0.0; 2 * d];
    let mut base = vec![0; 2 * d];
    let mut frac = vec![0.0; 2 * d];
    for it in 1..grid.n_t() {
        let prev_start = (it - 1) * ll;
        for ln in 0..ll {
            let v = grid.v_point(ln % vc);
            let x = grid.x_point(ln / vc);
            let mut cont = 0.0;
            for (weight, z1, z2) in &rule {
                for k in 0..d {
                    let (vn, xn) = transition(v[k], x[k], dt, z1[k], z2[k]);
                    coords[k] = vn;
                    coords[d + k] = xn;
                }
                cont += weight * interp.eval(&values[prev_start..prev_start + ll], &coords, &mut base, &mut frac);
            }
            values.push(if cfg.early_exercise { cont.max(psi[ln]) } else { cont });
        }
    }
    Ok(DpResult { value: ScalarField::new(grid.clone(), values)?, clipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;

    fn grid(n: usize, t: f64) -> GridSpec {
        let dom = BoxDomain::new(vec![-2.0], vec![2.0], vec![-1.0], vec![3.0], 0.0, t).unwrap();
        GridSpec::uniform(dom, n).unwrap()
    }

    fn put(_: &[f64], x: &[f64]) -> f64 {
        (1.0 - x[0]).max(0.0)
    }

    #[test]
    fn constant_payoff_is_its_own_value() {
        let g = grid(9, 0.5);
        let r = value_by_dynamic_programming(|_, _| 2.0, &g, &DpConfig::default()).unwrap();
        assert!(r.value.values().iter().all(|&a| (a - 2.0).abs() < 1e-12));
        assert_eq!(r.clipped, 0);
    }

    #[test]
    fn short_horizon_returns_payoff() {
        let g = grid(17, 1e-6);
        let r = value_by_dynamic_programming(put, &g, &DpConfig::default()).unwrap();
        let last = r.initial_level();
        for (ln, val) in last.iter().enumerate() {
            let x = g.x_point(ln / g.v_count());
            assert!((val - put(&[], &x)).abs() < 1e-3);
        }
    }

    #[test]
    fn dominates_payoff_and_is_monotone_in_it() {
        let g = grid(13, 0.5);
        let lower = value_by_dynamic_programming(put, &g, &DpConfig::default()).unwrap();
        let upper = value_by_dynamic_programming(|v, x| put(v, x) + 0.1 * (v[0] * x[0]).sin().abs(), &g, &DpConfig::default()).unwrap();
        for (node, (a, b)) in lower.value.values().iter().zip(upper.value.values()).enumerate() {
            let (iv, ix, _) = g.split(node);
            assert!(*a >= put(&g.v_point(iv), &g.x_point(ix)) - 1e-15);
            assert!(b >= a);
        }
    }

    #[test]
    fn clipping_is_counted() {
        let g = grid(5, 0.5);
        let r = value_by_dynamic_programming(|_, x| if x[0] > 2.0 { 1e20 } else { 0.0 }, &g, &DpConfig::default()).unwrap();
        assert_eq!(r.clipped, g.v_count());
        assert!(r.value.max_abs() <= PAYOFF_CLIP);
    }
}
