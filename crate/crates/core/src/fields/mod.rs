//! Tensor grids over `Ω_v × Ω_x × [t_lo, t_hi]`, nodal scalar fields and
//! velocity-staggered vector fields, plus the discrete norms in [`norms`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{BoundaryClass, BoxDomain, Point};
use crate::stencil::{trapezoid, VGrid};
use crate::{Error, Result};

mod norms;

pub use norms::{apply_y, norm_h1_v, norm_hm1_v, norm_l2, norm_w, pairing, poincare_ratio};

/// Uniform tensor grid. Nodes are numbered with velocity varying fastest,
/// then position, then time: `node = iv + Nv * (ix + Nx * it)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dom: BoxDomain,
    n_v: Vec<usize>,
    n_x: Vec<usize>,
    n_t: usize,
    h_v: Vec<f64>,
    h_x: Vec<f64>,
    h_t: f64,
    v_strides: Vec<usize>,
    x_strides: Vec<usize>,
    v_count: usize,
    x_count: usize,
}

impl GridSpec {
    pub fn new(dom: BoxDomain, n_v: Vec<usize>, n_x: Vec<usize>, n_t: usize) -> Result<Self> {
        let d = dom.dim();
        if n_v.len() != d || n_x.len() != d {
            return Err(Error::InvalidGrid(format!("node counts must have length {d}")));
        }
        if n_v.iter().chain(&n_x).chain(core::iter::once(&n_t)).any(|&n| n < 3) {
            return Err(Error::InvalidGrid("grid axis below minimum 3".into()));
        }
        let spacing = |lo: &[f64], hi: &[f64], n: &[usize]| -> Vec<f64> {
            lo.iter().zip(hi).zip(n).map(|((a, b), &m)| (b - a) / (m - 1) as f64).collect()
        };
        let h_v = spacing(&dom.v_lo, &dom.v_hi, &n_v);
        let h_x = spacing(&dom.x_lo, &dom.x_hi, &n_x);
        let h_t = (dom.t_hi - dom.t_lo) / (n_t - 1) as f64;
        let strides = |n: &[usize]| {
            let mut s = Vec::with_capacity(n.len());
            let mut acc = 1;
            for &m in n {
                s.push(acc);
                acc *= m;
            }
            (s, acc)
        };
        let (v_strides, v_count) = strides(&n_v);
        let (x_strides, x_count) = strides(&n_x);
        Ok(GridSpec { dom, n_v, n_x, n_t, h_v, h_x, h_t, v_strides, x_strides, v_count, x_count })
    }

    /// `n` nodes along every axis.
    pub fn uniform(dom: BoxDomain, n: usize) -> Result<Self> {
        let d = dom.dim();
        Self::new(dom, vec![n; d], vec![n; d], n)
    }

    pub fn dom(&self) -> &BoxDomain {
        &self.dom
    }
    pub fn dim(&self) -> usize {
        self.dom.dim()
    }
    pub fn n_v(&self) -> &[usize] {
        &self.n_v
    }
    pub fn n_x(&self) -> &[usize] {
        &self.n_x
    }
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn h_v(&self) -> &[f64] {
        &self.h_v
    }
    pub fn h_x(&self) -> &[f64] {
        &self.h_x
    }
    pub fn h_t(&self) -> f64 {
        self.h_t
    }
    pub fn v_strides(&self) -> &[usize] {
        &self.v_strides
    }
    pub fn x_strides(&self) -> &[usize] {
        &self.x_strides
    }
    /// Nodes in one velocity slice.
    pub fn v_count(&self) -> usize {
        self.v_count
    }
    pub fn x_count(&self) -> usize {
        self.x_count
    }
    /// Nodes in one time level.
    pub fn level_len(&self) -> usize {
        self.v_count * self.x_count
    }
    pub fn len(&self) -> usize {
        self.level_len() * self.n_t
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, iv: usize, ix: usize, it: usize) -> usize {
        iv + self.v_count * (ix + self.x_count * it)
    }

    pub fn split(&self, node: usize) -> (usize, usize, usize) {
        let iv = node % self.v_count;
        let rest = node / self.v_count;
        (iv, rest % self.x_count, rest / self.x_count)
    }

    /// Axis-`k` index of the velocity multi-index `iv`.
    pub fn v_index(&self, iv: usize, k: usize) -> usize {
        (iv / self.v_strides[k]) % self.n_v[k]
    }
    pub fn x_index(&self, ix: usize, k: usize) -> usize {
        (ix / self.x_strides[k]) % self.n_x[k]
    }

    pub fn v_coord(&self, iv: usize, k: usize) -> f64 {
        self.dom.v_lo[k] + self.v_index(iv, k) as f64 * self.h_v[k]
    }
    pub fn x_coord(&self, ix: usize, k: usize) -> f64 {
        self.dom.x_lo[k] + self.x_index(ix, k) as f64 * self.h_x[k]
    }
    pub fn t_coord(&self, it: usize) -> f64 {
        self.dom.t_lo + it as f64 * self.h_t
    }
    pub fn v_point(&self, iv: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.v_coord(iv, k)).collect()
    }
    pub fn x_point(&self, ix: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.x_coord(ix, k)).collect()
    }
    pub fn point(&self, node: usize) -> Point {
        let (iv, ix, it) = self.split(node);
        Point { v: self.v_point(iv), x: self.x_point(ix), t: self.t_coord(it) }
    }

    pub fn v_weight(&self, iv: usize) -> f64 {
        (0..self.dim()).map(|k| trapezoid(self.v_index(iv, k), self.n_v[k], self.h_v[k])).product()
    }
    pub fn x_weight(&self, ix: usize) -> f64 {
        (0..self.dim()).map(|k| trapezoid(self.x_index(ix, k), self.n_x[k], self.h_x[k])).product()
    }
    pub fn t_weight(&self, it: usize) -> f64 {
        trapezoid(it, self.n_t, self.h_t)
    }
    /// Trapezoidal quadrature weight of a node.
    pub fn weight(&self, node: usize) -> f64 {
        let (iv, ix, it) = self.split(node);
        self.v_weight(iv) * self.x_weight(ix) * self.t_weight(it)
    }

    pub fn is_v_boundary(&self, iv: usize) -> bool {
        (0..self.dim()).any(|k| {
            let i = self.v_index(iv, k);
            i == 0 || i + 1 == self.n_v[k]
        })
    }

    /// Kolmogorov-boundary class of a grid node, from the box faces it lies
    /// on (an edge belongs to `∂_K` if any adjacent face does).
    pub fn classify_node(&self, node: usize) -> BoundaryClass {
        let (iv, ix, it) = self.split(node);
        if self.is_v_boundary(iv) || it == 0 {
            return BoundaryClass::KolmogorovBoundary;
        }
        let mut on_boundary = it + 1 == self.n_t;
        for k in 0..self.dim() {
            let i = self.x_index(ix, k);
            let v = self.v_coord(iv, k);
            if i == 0 {
                on_boundary = true;
                if -v > 0.0 {
                    return BoundaryClass::KolmogorovBoundary;
                }
            }
            if i + 1 == self.n_x[k] {
                on_boundary = true;
                if v > 0.0 {
                    return BoundaryClass::KolmogorovBoundary;
                }
            }
        }
        if on_boundary {
            BoundaryClass::NonKolmogorovBoundary
        } else {
            BoundaryClass::Interior
        }
    }

    pub fn is_kolmogorov_node(&self, node: usize) -> bool {
        self.classify_node(node) == BoundaryClass::KolmogorovBoundary
    }

    pub(crate) fn vgrid(&self) -> VGrid {
        VGrid::new(&self.n_v, &self.h_v)
    }
}

/// Nodal values of a scalar function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(format!("non-finite value at node {i}")));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        ScalarField { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// Samples `f(v, x, t)` at every node.
    pub fn from_fn<F>(grid: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64], &[f64], f64) -> f64,
    {
        let mut values = Vec::with_capacity(grid.len());
        let vs: Vec<Vec<f64>> = (0..grid.v_count()).map(|iv| grid.v_point(iv)).collect();
        let xs: Vec<Vec<f64>> = (0..grid.x_count()).map(|ix| grid.x_point(ix)).collect();
        for it in 0..grid.n_t() {
            let t = grid.t_coord(it);
            for x in &xs {
                for v in &vs {
                    values.push(f(v, x, t));
                }
            }
        }
        ScalarField { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, iv: usize, ix: usize, it: usize) -> f64 {
        self.values[self.grid.node(iv, ix, it)]
    }

    /// All `(v, x)` values at time level `it`.
    pub fn level(&self, it: usize) -> &[f64] {
        let n = self.grid.level_len();
        &self.values[it * n..(it + 1) * n]
    }
    pub fn level_mut(&mut self, it: usize) -> &mut [f64] {
        let n = self.grid.level_len();
        &mut self.values[it * n..(it + 1) * n]
    }

    /// Velocity slice at fixed `(x, t)`.
    pub fn v_slice(&self, ix: usize, it: usize) -> &[f64] {
        let start = self.grid.node(0, ix, it);
        &self.values[start..start + self.grid.v_count()]
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&a| f(a)).collect() }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|a| alpha * a)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &ScalarField, beta: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(ScalarField { grid: self.grid.clone(), values })
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Multilinear interpolation in all `2d + 1` coordinates, clamping the
    /// query point onto the grid box.
    pub fn interpolate(&self, p: &Point) -> Result<f64> {
        let g = &self.grid;
        let d = g.dim();
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
        // (stride, lower index, fraction) per axis
        let mut axes: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * d + 1);
        let locate = |c: f64, lo: f64, h: f64, n: usize| -> (usize, f64) {
            let s = ((c - lo) / h).clamp(0.0, (n - 1) as f64);
            let i = (num_traits::Float::floor(s) as usize).min(n - 2);
            (i, s - i as f64)
        };
        for k in 0..d {
            let (i, f) = locate(p.v[k], g.dom.v_lo[k], g.h_v[k], g.n_v[k]);
            axes.push((g.v_strides[k], i, f));
        }
        for k in 0..d {
            let (i, f) = locate(p.x[k], g.dom.x_lo[k], g.h_x[k], g.n_x[k]);
            axes.push((g.v_count * g.x_strides[k], i, f));
        }
        let (i, f) = locate(p.t, g.dom.t_lo, g.h_t, g.n_t);
        axes.push((g.level_len(), i, f));
        let base: usize = axes.iter().map(|(s, i, _)| s * i).sum();
        let mut total = 0.0;
        for corner in 0..(1usize << axes.len()) {
            let mut w = 1.0;
            let mut node = base;
            for (a, &(s, _, f)) in axes.iter().enumerate() {
                if corner >> a & 1 == 1 {
                    w *= f;
                    node += s;
                } else {
                    w *= 1.0 - f;
                }
            }
            if w != 0.0 {
                total += w * self.values[node];
            }
        }
        Ok(total)
    }
}

/// Vector field on velocity-staggered nodes: component `k` lives on the
/// midpoints between neighbours along velocity axis `k`, for every `(x,t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VFlux {
    grid: GridSpec,
    components: Vec<Vec<f64>>,
}

impl VFlux {
    pub fn zeros(grid: &GridSpec) -> Self {
        let vg = grid.vgrid();
        let slices = grid.x_count() * grid.n_t();
        let components = (0..grid.dim()).map(|k| vec![0.0; vg.face_count(k) * slices]).collect();
        VFlux { grid: grid.clone(), components }
    }

    pub fn new(grid: GridSpec, components: Vec<Vec<f64>>) -> Result<Self> {
        let shape = Self::zeros(&grid);
        if components.len() != shape.components.len()
            || components.iter().zip(&shape.components).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::ShapeMismatch("flux components do not match the staggered grid".into()));
        }
        if components.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite flux value".into()));
        }
        Ok(VFlux { grid, components })
    }

    /// Staggered gradient `∇_v u` by forward differences.
    pub fn gradient_of(u: &ScalarField) -> Self {
        let g = u.grid();
        let vg = g.vgrid();
        let mut flux = Self::zeros(g);
        for it in 0..g.n_t() {
            for ix in 0..g.x_count() {
                let slice = u.v_slice(ix, it);
                let s = ix + g.x_count() * it;
                for k in 0..g.dim() {
                    let fc = vg.face_count(k);
                    flux.components[k][s * fc..(s + 1) * fc].copy_from_slice(&vg.gradient(slice, k));
                }
            }
        }
        flux
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }
    pub fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.components
    }

    /// The `d` staggered component arrays of one `(x,t)` slice.
    pub fn slice(&self, ix: usize, it: usize) -> Vec<Vec<f64>> {
        let vg_faces: Vec<usize> = (0..self.grid.dim()).map(|k| self.components[k].len() / (self.grid.x_count() * self.grid.n_t())).collect();
        let s = ix + self.grid.x_count() * it;
        (0..self.grid.dim()).map(|k| self.components[k][s * vg_faces[k]..(s + 1) * vg_faces[k]].to_vec()).collect()
    }

    pub fn set_slice(&mut self, ix: usize, it: usize, comps: &[Vec<f64>]) {
        let s = ix + self.grid.x_count() * it;
        for (k, c) in comps.iter().enumerate() {
            let n = c.len();
            self.components[k][s * n..(s + 1) * n].copy_from_slice(c);
        }
    }

    pub fn combine(&self, alpha: f64, other: &VFlux, beta: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("fluxes live on different grids".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| alpha * p + beta * q).collect())
            .collect();
        Ok(VFlux { grid: self.grid.clone(), components })
    }

    /// `‖ξ‖_{L²}` with midpoint-in-`k`, trapezoidal elsewhere quadrature.
    pub fn norm_l2(&self) -> f64 {
        let g = &self.grid;
        let vg = g.vgrid();
        let mut total = 0.0;
        for it in 0..g.n_t() {
            for ix in 0..g.x_count() {
                let w = g.x_weight(ix) * g.t_weight(it);
                let comps = self.slice(ix, it);
                for (k, c) in comps.iter().enumerate() {
                    total += w * c.iter().enumerate().map(|(f, a)| vg.face_weight(k, f) * a * a).sum::<f64>();
                }
            }
        }
        num_traits::Float::sqrt(total)
    }
}
