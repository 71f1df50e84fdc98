//! Geometry of a single velocity slice `Ω_v × {(x,t)}` and the flux-form
//! diffusion stencil shared by the norm, assembly and flux-recovery code.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::SparseOperator;

/// Harmonic mean, the face value of a diffusion coefficient.
pub(crate) fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Trapezoidal weight of node `i` on an axis with `n` nodes and spacing `h`.
pub(crate) fn trapezoid(i: usize, n: usize, h: f64) -> f64 {
    if i == 0 || i + 1 == n {
        0.5 * h
    } else {
        h
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VGrid {
    pub n: Vec<usize>,
    pub h: Vec<f64>,
    pub strides: Vec<usize>,
    pub count: usize,
    /// Node index of every interior node, in increasing order.
    pub interior: Vec<usize>,
    /// Inverse of `interior`.
    pub interior_of: Vec<Option<usize>>,
}

impl VGrid {
    pub fn new(n: &[usize], h: &[f64]) -> Self {
        let mut strides = Vec::with_capacity(n.len());
        let mut count = 1;
        for &m in n {
            strides.push(count);
            count *= m;
        }
        let mut g = VGrid {
            n: n.to_vec(),
            h: h.to_vec(),
            strides,
            count,
            interior: Vec::new(),
            interior_of: vec![None; count],
        };
        for iv in 0..count {
            if !g.is_boundary(iv) {
                g.interior_of[iv] = Some(g.interior.len());
                g.interior.push(iv);
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn index(&self, iv: usize, k: usize) -> usize {
        (iv / self.strides[k]) % self.n[k]
    }

    pub fn is_boundary(&self, iv: usize) -> bool {
        (0..self.dim()).any(|k| {
            let i = self.index(iv, k);
            i == 0 || i + 1 == self.n[k]
        })
    }

    pub fn weight(&self, iv: usize) -> f64 {
        (0..self.dim()).map(|k| trapezoid(self.index(iv, k), self.n[k], self.h[k])).product()
    }

    /// Number of faces normal to axis `k`.
    pub fn face_count(&self, k: usize) -> usize {
        self.count / self.n[k] * (self.n[k] - 1)
    }

    /// Node below face `f` along axis `k`; the upper node is `+ strides[k]`.
    pub fn face_lower(&self, k: usize, f: usize) -> usize {
        // faces are enumerated with axis k running over n[k] - 1 positions
        let mut rem = f;
        let mut iv = 0;
        for j in 0..self.dim() {
            let m = if j == k { self.n[j] - 1 } else { self.n[j] };
            iv += (rem % m) * self.strides[j];
            rem /= m;
        }
        iv
    }

    /// Face index of the face above node `iv` along axis `k` (requires the
    /// node not to sit on the upper end of the axis).
    pub fn face_above(&self, k: usize, iv: usize) -> usize {
        let mut f = 0;
        let mut stride = 1;
        for j in 0..self.dim() {
            let m = if j == k { self.n[j] - 1 } else { self.n[j] };
            f += self.index(iv, j) * stride;
            stride *= m;
        }
        f
    }

    /// Quadrature weight of face `f` normal to `k`: midpoint in `k`,
    /// trapezoidal in the other axes.
    pub fn face_weight(&self, k: usize, f: usize) -> f64 {
        let lower = self.face_lower(k, f);
        (0..self.dim())
            .map(|j| if j == k { self.h[j] } else { trapezoid(self.index(lower, j), self.n[j], self.h[j]) })
            .product()
    }

    /// Forward differences of `u` across every face normal to `k`.
    pub fn gradient(&self, u: &[f64], k: usize) -> Vec<f64> {
        let s = self.strides[k];
        (0..self.face_count(k))
            .map(|f| {
                let lo = self.face_lower(k, f);
                (u[lo + s] - u[lo]) / self.h[k]
            })
            .collect()
    }

    /// Average of the (one or two) faces adjacent to node `iv` along `k`.
    pub fn face_to_node(&self, faces: &[f64], k: usize, iv: usize) -> f64 {
        let i = self.index(iv, k);
        let above = (i + 1 < self.n[k]).then(|| faces[self.face_above(k, iv)]);
        let below = (i > 0).then(|| faces[self.face_above(k, iv - self.strides[k])]);
        match (below, above) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        }
    }

    /// Rows of `-div(A grad u)` at interior node `iv`, as `(node, weight)`
    /// couplings. Diagonal entries of `A` enter through harmonic face
    /// averages; off-diagonal entries through the centered cross stencil.
    pub fn diffusion_row<F>(&self, iv: usize, coef: &F, out: &mut Vec<(usize, f64)>)
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let d = self.dim();
        let mut diag = 0.0;
        for k in 0..d {
            let s = self.strides[k];
            let h2 = self.h[k] * self.h[k];
            let here = coef(iv, k, k);
            let ap = harmonic(here, coef(iv + s, k, k)) / h2;
            let am = harmonic(here, coef(iv - s, k, k)) / h2;
            diag += ap + am;
            out.push((iv + s, -ap));
            out.push((iv - s, -am));
        }
        out.push((iv, diag));
        for k in 0..d {
            for l in 0..d {
                if k == l {
                    continue;
                }
                let (sk, sl) = (self.strides[k], self.strides[l]);
                let c = 1.0 / (4.0 * self.h[k] * self.h[l]);
                let ap = coef(iv + sk, k, l) * c;
                let am = coef(iv - sk, k, l) * c;
                if ap != 0.0 {
                    out.push((iv + sk + sl, -ap));
                    out.push((iv + sk - sl, ap));
                }
                if am != 0.0 {
                    out.push((iv - sk + sl, am));
                    out.push((iv - sk - sl, -am));
                }
            }
        }
    }

    /// Assembles `-div(A grad ·)` on interior nodes with Dirichlet values
    /// eliminated. Returns the operator and, for each interior row, the
    /// contribution `Σ_b a_ib u_b` of the supplied boundary values.
    pub fn dirichlet_system<F>(&self, coef: &F, boundary: &[f64]) -> (SparseOperator, Vec<f64>)
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let m = self.interior.len();
        let mut triplets = Vec::with_capacity(m * (1 + 2 * self.dim() * self.dim()));
        let mut lift = vec![0.0; m];
        let mut row = Vec::new();
        for (r, &iv) in self.interior.iter().enumerate() {
            row.clear();
            self.diffusion_row(iv, coef, &mut row);
            for &(node, a) in &row {
                match self.interior_of[node] {
                    Some(c) => triplets.push((r, c, a)),
                    None => lift[r] += a * boundary[node],
                }
            }
        }
        (SparseOperator::from_triplets(m, triplets), lift)
    }

    /// Applies `-div(A grad ·)` to a full slice (boundary values included),
    /// returning values on interior nodes only (zero elsewhere).
    pub fn apply_diffusion<F>(&self, coef: &F, u: &[f64]) -> Vec<f64>
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let mut out = vec![0.0; self.count];
        let mut row = Vec::new();
        for &iv in &self.interior {
            row.clear();
            self.diffusion_row(iv, coef, &mut row);
            out[iv] = row.iter().map(|&(n, a)| a * u[n]).sum();
        }
        out
    }

    /// Discrete `∫ A ξ · η dv` for staggered vector fields `ξ`, `η`
    /// (component `k` lives on the faces normal to `k`).
    pub fn energy<F>(&self, coef: &F, xi: &[Vec<f64>], eta: &[Vec<f64>]) -> f64
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let d = self.dim();
        let mut total = 0.0;
        for k in 0..d {
            let s = self.strides[k];
            for f in 0..self.face_count(k) {
                let lo = self.face_lower(k, f);
                let a = harmonic(coef(lo, k, k), coef(lo + s, k, k));
                total += self.face_weight(k, f) * a * xi[k][f] * eta[k][f];
            }
        }
        if d > 1 {
            for iv in 0..self.count {
                let w = self.weight(iv);
                for k in 0..d {
                    for l in 0..d {
                        if k == l {
                            continue;
                        }
                        let a = coef(iv, k, l);
                        if a != 0.0 {
                            total += w * a * self.face_to_node(&xi[l], l, iv) * self.face_to_node(&eta[k], k, iv);
                        }
                    }
                }
            }
        }
        total
    }
}
