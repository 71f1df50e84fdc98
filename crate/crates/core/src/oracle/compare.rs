use alloc::vec::Vec;

use crate::fields::ScalarField;
use crate::{Error, Result};

/// Sub-box of `Ω_v × Ω_x` on which two fields are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeBox {
    pub v_lo: Vec<f64>,
    pub v_hi: Vec<f64>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub max_gap: f64,
    pub mean_gap: f64,
    pub n_probe: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Absolute gap statistics between two fields on the same grid, over the
/// nodes of time level `time_index` inside `probe`.
pub fn compare_with_pde(
    u_pde: &ScalarField,
    oracle: &ScalarField,
    probe: &ProbeBox,
    time_index: usize,
    tolerance: f64,
) -> Result<GapReport> {
    u_pde.check_same_grid(oracle)?;
    let g = u_pde.grid();
    let d = g.dim();
    if [&probe.v_lo, &probe.v_hi, &probe.x_lo, &probe.x_hi].iter().any(|b| b.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: probe.v_lo.len() });
    }
    if time_index >= g.n_t() {
        return Err(Error::ShapeMismatch("probe level outside the grid".into()));
    }
    let within = |c: &[f64], lo: &[f64], hi: &[f64]| c.iter().zip(lo.iter().zip(hi)).all(|(a, (l, h))| *a >= l - 1e-12 && *a <= h + 1e-12);
    let (a, b) = (u_pde.level(time_index), oracle.level(time_index));
    let vc = g.v_count();
    let (mut max_gap, mut sum, mut n_probe) = (0.0f64, 0.0, 0);
    for ln in 0..g.level_len() {
        if within(&g.v_point(ln % vc), &probe.v_lo, &probe.v_hi) && within(&g.x_point(ln / vc), &probe.x_lo, &probe.x_hi) {
            let gap = (a[ln] - b[ln]).abs();
            max_gap = max_gap.max(gap);
            sum += gap;
            n_probe += 1;
        }
    }
    if n_probe == 0 {
        return Err(Error::InvalidGrid("probe box contains no grid nodes".into()));
    }
    Ok(GapReport { max_gap, mean_gap: sum / n_probe as f64, n_probe, tolerance, passed: max_gap < tolerance })
}
