//! Rough diffusion matrices `A(v,x,t)`: bounded, measurable, symmetric and
//! uniformly elliptic with declared bounds `λ ≤ A ≤ Λ`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

use crate::fields::GridSpec;
use crate::linalg::{orthonormalize_columns, symmetric_eigenvalues};
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-10;

/// Nodal `d × d` diffusion matrices (row-major, node after node).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    grid: GridSpec,
    matrices: Vec<f64>,
    lambda: f64,
    big_lambda: f64,
}

/// Outcome of [`CoefficientField::verify_ellipticity`].
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub ok: bool,
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
    pub min_node: usize,
    pub max_eigenvalue: f64,
    pub max_node: usize,
}

impl CoefficientField {
    pub fn new(grid: GridSpec, matrices: Vec<f64>, lambda: f64, big_lambda: f64) -> Result<Self> {
        let d = grid.dim();
        if matrices.len() != grid.len() * d * d {
            return Err(Error::InvalidCoefficients(format!(
                "expected {} matrix entries, found {}",
                grid.len() * d * d,
                matrices.len()
            )));
        }
        if !(lambda > 0.0) || !(lambda <= big_lambda) || !big_lambda.is_finite() {
            return Err(Error::InvalidCoefficients(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}")));
        }
        if matrices.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite entry".into()));
        }
        Ok(CoefficientField { grid, matrices, lambda, big_lambda })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn matrix(&self, node: usize) -> &[f64] {
        let dd = self.grid.dim() * self.grid.dim();
        &self.matrices[node * dd..(node + 1) * dd]
    }

    /// Entry `a_kl` at `node`.
    pub fn a(&self, node: usize, k: usize, l: usize) -> f64 {
        let d = self.grid.dim();
        self.matrices[node * d * d + k * d + l]
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.grid.dim();
        self.matrices.chunks(d * d).all(|m| (0..d).all(|k| (0..d).all(|l| k == l || m[k * d + l] == 0.0)))
    }

    /// Checks symmetry and that every nodal spectrum lies in `[λ, Λ]` up to
    /// `1e-10`; never fails, reporting the extreme eigenvalues instead.
    pub fn verify_ellipticity(&self) -> EllipticityReport {
        let d = self.grid.dim();
        let mut report = EllipticityReport {
            ok: true,
            max_asymmetry: 0.0,
            min_eigenvalue: f64::INFINITY,
            min_node: 0,
            max_eigenvalue: f64::NEG_INFINITY,
            max_node: 0,
        };
        for node in 0..self.grid.len() {
            let m = self.matrix(node);
            for k in 0..d {
                for l in (k + 1)..d {
                    report.max_asymmetry = report.max_asymmetry.max((m[k * d + l] - m[l * d + k]).abs());
                }
            }
            let eig = symmetric_eigenvalues(m, d);
            if eig[0] < report.min_eigenvalue {
                report.min_eigenvalue = eig[0];
                report.min_node = node;
            }
            if eig[d - 1] > report.max_eigenvalue {
                report.max_eigenvalue = eig[d - 1];
                report.max_node = node;
            }
        }
        report.ok = report.max_asymmetry <= SYMMETRY_TOL
            && report.min_eigenvalue >= self.lambda - SPECTRUM_TOL
            && report.max_eigenvalue <= self.big_lambda + SPECTRUM_TOL;
        report
    }

    /// `Ok(())` when the field passes [`Self::verify_ellipticity`].
    pub fn require_elliptic(&self) -> Result<()> {
        let r = self.verify_ellipticity();
        if r.ok {
            Ok(())
        } else if r.min_eigenvalue < self.lambda - SPECTRUM_TOL || r.max_asymmetry > SYMMETRY_TOL {
            Err(Error::UnverifiedCoefficients { node: r.min_node, eigenvalue: r.min_eigenvalue })
        } else {
            Err(Error::UnverifiedCoefficients { node: r.max_node, eigenvalue: r.max_eigenvalue })
        }
    }
}

/// Recipes for test coefficient fields.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientKind {
    Identity,
    /// Constant diagonal matrix with the given positive entries.
    Diagonal(Vec<f64>),
    /// Alternates two constant SPD matrices (row-major) on blocks of
    /// `period` grid cells along every axis.
    Checkerboard { a1: Vec<f64>, a2: Vec<f64>, period: usize },
    /// Independent `Q diag(μ) Qᵀ` per node with `μ_i ~ U[λ, Λ]` and a random
    /// orthogonal `Q`, reproducible from `seed`.
    RandomSpd { lambda: f64, big_lambda: f64, seed: u64 },
}

fn spectrum(m: &[f64], d: usize) -> Result<(f64, f64)> {
    if m.len() != d * d {
        return Err(Error::InvalidCoefficients(format!("matrix needs {} entries", d * d)));
    }
    for k in 0..d {
        for l in 0..d {
            if (m[k * d + l] - m[l * d + k]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidCoefficients("matrix is not symmetric".into()));
            }
        }
    }
    let e = symmetric_eigenvalues(m, d);
    if !(e[0] > 0.0) {
        return Err(Error::InvalidCoefficients("matrix is not positive definite".into()));
    }
    Ok((e[0], e[d - 1]))
}

pub fn make_coefficients(kind: &CoefficientKind, grid: &GridSpec) -> Result<CoefficientField> {
    let d = grid.dim();
    let n = grid.len();
    match kind {
        CoefficientKind::Identity => {
            let mut one = vec![0.0; d * d];
            for k in 0..d {
                one[k * d + k] = 1.0;
            }
            CoefficientField::new(grid.clone(), one.repeat(n), 1.0, 1.0)
        }
        CoefficientKind::Diagonal(values) => {
            if values.len() != d {
                return Err(Error::InvalidCoefficients(format!("diagonal needs {d} entries")));
            }
            if values.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
                return Err(Error::InvalidCoefficients("diagonal entries must be positive".into()));
            }
            let mut m = vec![0.0; d * d];
            for k in 0..d {
                m[k * d + k] = values[k];
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(0.0, f64::max);
            CoefficientField::new(grid.clone(), m.repeat(n), lo, hi)
        }
        CoefficientKind::Checkerboard { a1, a2, period } => {
            if *period == 0 {
                return Err(Error::InvalidCoefficients("checkerboard period must be at least 1".into()));
            }
            let (lo1, hi1) = spectrum(a1, d)?;
            let (lo2, hi2) = spectrum(a2, d)?;
            let mut matrices = Vec::with_capacity(n * d * d);
            for node in 0..n {
                let (iv, ix, it) = grid.split(node);
                let mut parity = it / period;
                for k in 0..d {
                    parity += grid.v_index(iv, k) / period + grid.x_index(ix, k) / period;
                }
                matrices.extend_from_slice(if parity % 2 == 0 { a1 } else { a2 });
            }
            CoefficientField::new(grid.clone(), matrices, lo1.min(lo2), hi1.max(hi2))
        }
        CoefficientKind::RandomSpd { lambda, big_lambda, seed } => {
            if !(*lambda > 0.0) || !(lambda <= big_lambda) || !big_lambda.is_finite() {
                return Err(Error::InvalidCoefficients(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut matrices = Vec::with_capacity(n * d * d);
            let mut q = vec![0.0; d * d];
            let mut mu = vec![0.0; d];
            for _ in 0..n {
                for m in mu.iter_mut() {
                    let u: f64 = StandardUniform.sample(&mut rng);
                    *m = lambda + (big_lambda - lambda) * u;
                }
                loop {
                    for a in q.iter_mut() {
                        *a = StandardNormal.sample(&mut rng);
                    }
                    if orthonormalize_columns(&mut q, d) {
                        break;
                    }
                }
                let start = matrices.len();
                matrices.resize(start + d * d, 0.0);
                for k in 0..d {
                    for l in k..d {
                        let s: f64 = (0..d).map(|j| q[k * d + j] * mu[j] * q[l * d + j]).sum();
                        matrices[start + k * d + l] = s;
                        matrices[start + l * d + k] = s;
                    }
                }
            }
            CoefficientField::new(grid.clone(), matrices, *lambda, *big_lambda)
        }
    }
}
