//! Small linear-algebra kit: compressed sparse rows, a banded LU for the
//! M-matrices produced by assembly, and dense helpers for `d × d` blocks.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent once std is linked
use num_traits::Float;

use crate::{Error, Result};

/// Square sparse matrix in compressed-row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator { dim, row_ptr, cols, vals }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    t.push((i, j, a));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i` as `(column, value)` pairs, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, a)| (i, j, a)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, a)| a)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut t: Vec<_> = self.triplets().collect();
        t.extend(d.iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(i, &a)| (i, i, a)));
        Self::from_triplets(self.dim, t)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut lo = 0;
        let mut hi = 0;
        for (i, j, _) in self.triplets() {
            if j < i {
                lo = lo.max(i - j);
            } else {
                hi = hi.max(j - i);
            }
        }
        (lo, hi)
    }

    /// Row-by-row check of the M-matrix sign pattern: positive diagonal,
    /// nonpositive off-diagonals, weak diagonal dominance. Returns the
    /// smallest dominance margin `a_ii - Σ_{j≠i} |a_ij|`, or `None` when the
    /// sign pattern fails.
    pub fn m_matrix_margin(&self) -> Option<f64> {
        let mut margin = f64::INFINITY;
        for i in 0..self.dim {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (j, a) in self.row(i) {
                if i == j {
                    diag = a;
                } else if a > 0.0 {
                    return None;
                } else {
                    off -= a;
                }
            }
            if !(diag > 0.0) {
                return None;
            }
            margin = margin.min(diag - off);
        }
        if margin < -1e-9 * self.vals.iter().fold(0.0f64, |m, a| m.max(a.abs())) {
            return None;
        }
        Some(margin)
    }
}

/// LU factorization without pivoting, stored in band form. Nonsingular
/// M-matrices and SPD matrices factor stably without row exchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lo: usize,
    hi: usize,
    // row i holds columns i-lo ..= i+hi
    band: Vec<f64>,
}

impl BandedLu {
    pub fn factor(a: &SparseOperator) -> Result<Self> {
        let n = a.dim();
        let (lo, hi) = a.bandwidths();
        let width = lo + hi + 1;
        let mut band = vec![0.0; n * width];
        for (i, j, v) in a.triplets() {
            band[i * width + (j + lo - i)] += v;
        }
        let scale = band.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = band[k * width + lo];
            if !(pivot.abs() > 1e-14 * scale) || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: k, pivot });
            }
            let last = (k + lo).min(n - 1);
            for i in (k + 1)..=last {
                let ik = i * width + (k + lo - i);
                let factor = band[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                band[ik] = factor;
                let jmax = (k + hi).min(n - 1);
                for j in (k + 1)..=jmax {
                    let kj = band[k * width + (j + lo - k)];
                    if kj != 0.0 {
                        band[i * width + (j + lo - i)] -= factor * kj;
                    }
                }
            }
        }
        Ok(BandedLu { n, lo, hi, band })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let w = self.lo + self.hi + 1;
        for i in 0..self.n {
            let start = i.saturating_sub(self.lo);
            let mut s = b[i];
            for j in start..i {
                s -= self.band[i * w + (j + self.lo - i)] * b[j];
            }
            b[i] = s;
        }
        for i in (0..self.n).rev() {
            let end = (i + self.hi).min(self.n - 1);
            let mut s = b[i];
            for j in (i + 1)..=end {
                s -= self.band[i * w + (j + self.lo - i)] * b[j];
            }
            b[i] = s / self.band[i * w + self.lo];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Eigenvalues of a symmetric `n × n` row-major matrix by cyclic Jacobi
/// rotations, in ascending order.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    eig
}

/// Orthonormalizes the columns of a row-major `n × n` matrix in place
/// (modified Gram-Schmidt). Returns `false` if a column collapses.
pub fn orthonormalize_columns(m: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        for k in 0..j {
            let dot: f64 = (0..n).map(|i| m[i * n + j] * m[i * n + k]).sum();
            for i in 0..n {
                m[i * n + j] -= dot * m[i * n + k];
            }
        }
        let norm = (0..n).map(|i| m[i * n + j] * m[i * n + j]).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return false;
        }
        for i in 0..n {
            m[i * n + j] /= norm;
        }
    }
    true
}

/// Solves the SPD system `a x = b` (row-major `n × n`) by Cholesky. Fails when
/// a pivot falls below `rel_tol` times the largest diagonal entry.
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize, rel_tol: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    let dmax = (0..n).map(|i| a[i * n + i]).fold(0.0f64, f64::max);
    for j in 0..n {
        let mut s = a[j * n + j];
        for k in 0..j {
            s -= l[j * n + k] * l[j * n + k];
        }
        if !(s > rel_tol * dmax) {
            return None;
        }
        let ljj = s.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}
