//! Sparse assembly of the implicit time step
//!
//! ```text
//! (u^k - u^{k-1}) / h_t = div_v(A grad_v u^k) + v . grad_x u^k - f^k
//! ```
//!
//! on the `(v, x)` nodes of one time level, with data from `∂_K` folded into
//! the right-hand side. The diffusion uses harmonic face averages and the
//! transport first-order upwinding, so for diagonal `A` every step matrix is
//! an M-matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::coefficients::CoefficientField;
use crate::fields::{GridSpec, ScalarField};
use crate::{Error, Result};

pub use crate::linalg::SparseOperator;

/// Unknown `(v, x)` nodes of a time level `t > t_lo`: every level node not on
/// the Kolmogorov boundary. The classification does not change with `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLayout {
    unknowns: Vec<usize>,
    unknown_of: Vec<Option<usize>>,
}

impl LevelLayout {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.level_len();
        let mut unknowns = Vec::new();
        let mut unknown_of = vec![None; n];
        // level 1 is strictly inside (t_lo, t_hi) because n_t >= 3
        for (ln, slot) in unknown_of.iter_mut().enumerate() {
            if !grid.is_kolmogorov_node(ln + n) {
                *slot = Some(unknowns.len());
                unknowns.push(ln);
            }
        }
        LevelLayout { unknowns, unknown_of }
    }

    pub fn dim(&self) -> usize {
        self.unknowns.len()
    }
    /// Level-node index of each unknown.
    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }
    pub fn unknown_of(&self, level_node: usize) -> Option<usize> {
        self.unknown_of[level_node]
    }
}

/// Operator acting on all nodes of one time level; rows without a stencil
/// are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl LevelOperator {
    fn from_rows(rows: impl Iterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut op = LevelOperator { row_ptr: vec![0], cols: Vec::new(), vals: Vec::new() };
        for row in rows {
            for (c, a) in row {
                op.cols.push(c);
                op.vals.push(a);
            }
            op.row_ptr.push(op.cols.len());
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// Applies the operator to a full level of samples.
    pub fn apply(&self, level: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row(i).map(|(c, a)| a * level[c]).sum()).collect()
    }
}

/// `-div_v(A grad_v ·)` on time level `time_index`, with a row for every
/// node off `∂Ω_v`. Columns address level nodes, so boundary values stay
/// visible to callers that fold them into a right-hand side.
pub fn assemble_diffusion(a: &CoefficientField, time_index: usize) -> Result<LevelOperator> {
    a.require_elliptic()?;
    let g = a.grid();
    if time_index >= g.n_t() {
        return Err(Error::ShapeMismatch("time index outside the grid".into()));
    }
    let vg = g.vgrid();
    let vc = g.v_count();
    let mut buf = Vec::new();
    let rows = (0..g.level_len()).map(|ln| {
        let (iv, ix) = (ln % vc, ln / vc);
        if vg.interior_of[iv].is_none() {
            return Vec::new();
        }
        let coef = |jv: usize, k: usize, l: usize| a.a(g.node(jv, ix, time_index), k, l);
        buf.clear();
        vg.diffusion_row(iv, &coef, &mut buf);
        buf.iter().map(|&(jv, w)| (jv + vc * ix, w)).collect()
    });
    Ok(LevelOperator::from_rows(rows))
}

/// Upwind `v · grad_x` on a time level. For `v_k > 0` the forward
/// difference reaches towards the face where `v · N_x > 0`, for `v_k < 0`
/// the backward one; rows lacking that neighbour use the other side.
pub fn assemble_transport(grid: &GridSpec) -> LevelOperator {
    let vc = grid.v_count();
    let d = grid.dim();
    let rows = (0..grid.level_len()).map(|ln| {
        let (iv, ix) = (ln % vc, ln / vc);
        let mut row = Vec::with_capacity(2 * d + 1);
        let mut diag = 0.0;
        for k in 0..d {
            let v = grid.v_coord(iv, k);
            if v == 0.0 {
                continue;
            }
            let i = grid.x_index(ix, k);
            let s = vc * grid.x_strides()[k];
            let c = v / grid.h_x()[k];
            let forward = if v > 0.0 { i + 1 < grid.n_x()[k] } else { i == 0 };
            if forward {
                row.push((ln + s, c));
                diag -= c;
            } else {
                row.push((ln - s, -c));
                diag += c;
            }
        }
        if diag != 0.0 || !row.is_empty() {
            row.push((ln, diag));
        }
        row
    });
    LevelOperator::from_rows(rows)
}

/// One implicit step as a linear complementarity problem
/// `u ≥ ψ, M u - q ≥ 0, (M u - q)·(u - ψ) = 0` on the level's unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LcpSlice {
    pub m: SparseOperator,
    pub q: Vec<f64>,
    pub psi: Vec<f64>,
    pub time_index: usize,
    /// Level-node index of every row.
    pub unknowns: Vec<usize>,
}

impl LcpSlice {
    pub fn new(m: SparseOperator, q: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        let n = m.dim();
        if q.len() != n || psi.len() != n {
            return Err(Error::ShapeMismatch("LCP data lengths disagree with the matrix".into()));
        }
        Ok(LcpSlice { m, q, psi, time_index: 0, unknowns: (0..n).collect() })
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `M u - q`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.m.mul_vec(u);
        for (ri, qi) in r.iter_mut().zip(&self.q) {
            *ri -= qi;
        }
        r
    }
}

/// Builds `M = I/h_t + D - T` and `q = u^{k-1}/h_t - f^k + (boundary terms)`
/// for level `time_index ≥ 1`, where `D = -div(A grad)` and `T = v · grad_x`.
/// Values of `g` are read only on the Kolmogorov-boundary nodes of the
/// level, `prev_level` supplies `u^{k-1}`.
#[allow(clippy::too_many_arguments)]
pub fn build_time_step(
    a: &CoefficientField,
    layout: &LevelLayout,
    time_index: usize,
    prev_level: &[f64],
    f: &ScalarField,
    g: &ScalarField,
    psi: &ScalarField,
) -> Result<LcpSlice> {
    let grid = a.grid();
    if time_index == 0 || time_index >= grid.n_t() {
        return Err(Error::ShapeMismatch("time steps start at level 1".into()));
    }
    for field in [f, g, psi] {
        if field.grid() != grid {
            return Err(Error::ShapeMismatch("data and coefficients live on different grids".into()));
        }
    }
    if prev_level.len() != grid.level_len() {
        return Err(Error::ShapeMismatch("previous level has the wrong length".into()));
    }
    let diffusion = assemble_diffusion(a, time_index)?;
    let transport = assemble_transport(grid);
    Ok(combine_step(grid, layout, &diffusion, &transport, time_index, prev_level, f, g, psi))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn combine_step(
    grid: &GridSpec,
    layout: &LevelLayout,
    diffusion: &LevelOperator,
    transport: &LevelOperator,
    time_index: usize,
    prev_level: &[f64],
    f: &ScalarField,
    g: &ScalarField,
    psi: &ScalarField,
) -> LcpSlice {
    let inv_ht = 1.0 / grid.h_t();
    let g_level = g.level(time_index);
    let f_level = f.level(time_index);
    let n = layout.dim();
    let mut triplets = Vec::with_capacity(n * 7);
    let mut q = Vec::with_capacity(n);
    for (r, &ln) in layout.unknowns().iter().enumerate() {
        let mut rhs = prev_level[ln] * inv_ht - f_level[ln];
        triplets.push((r, r, inv_ht));
        let entries = diffusion.row(ln).chain(transport.row(ln).map(|(c, w)| (c, -w)));
        for (c, w) in entries {
            match layout.unknown_of(c) {
                Some(j) => triplets.push((r, j, w)),
                None => rhs -= w * g_level[c],
            }
        }
        q.push(rhs);
    }
    let psi_level = psi.level(time_index);
    LcpSlice {
        m: SparseOperator::from_triplets(n, triplets),
        q,
        psi: layout.unknowns().iter().map(|&ln| psi_level[ln]).collect(),
        time_index,
        unknowns: layout.unknowns().to_vec(),
    }
}
