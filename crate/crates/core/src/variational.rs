//! Variational diagnostics: flux recovery, the quadratic functionals
//! `J` and `𝒥`, the weak-form residual and the variational inequality gap.
//!
//! All pairings are discrete `L²` pairings with trapezoidal weights; the
//! gradient terms use the staggered energy `∭ A ξ · η`, which satisfies
//! `⟨-div(A∇u), φ⟩ = ∭ A∇u · ∇φ` exactly for `φ = 0` on `∂Ω_v`.

use alloc::vec;
use alloc::vec::Vec;

use crate::coefficients::CoefficientField;
use crate::fields::{apply_y, norm_hm1_v, GridSpec, ScalarField, VFlux};
use crate::geometry::BoxDomain;
use crate::linalg::BandedLu;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FluxCertificate {
    pub j: VFlux,
    /// `‖div_v(A j) - (f - Y w)‖_{L²H⁻¹}`.
    pub divergence_residual: f64,
}

fn slice_coef<'a>(a: &'a CoefficientField, ix: usize, it: usize) -> impl Fn(usize, usize, usize) -> f64 + 'a {
    let g = a.grid();
    move |iv, k, l| a.a(g.node(iv, ix, it), k, l)
}

fn same_slice_coefficients(a: &CoefficientField, ix: usize, it: usize) -> bool {
    let g = a.grid();
    (0..g.v_count()).all(|iv| a.matrix(g.node(iv, ix, it)) == a.matrix(g.node(iv, 0, 0)))
}

fn check_grids(a: &CoefficientField, fields: &[&ScalarField]) -> Result<()> {
    if fields.iter().any(|f| f.grid() != a.grid()) {
        return Err(Error::ShapeMismatch("fields and coefficients live on different grids".into()));
    }
    Ok(())
}

/// Solves `div_v(A ∇_v φ) = f - Y w` on every `(x,t)` slice with `φ = w`
/// on `∂Ω_v` and returns `j = ∇_v φ`. Matching `w` on the boundary makes
/// `j` the minimizer of `𝒥[w, ·]` over fluxes with the prescribed
/// divergence, so `J[w, f] = 𝒥[w, j]`.
pub fn recover_flux(w: &ScalarField, f: &ScalarField, a: &CoefficientField) -> Result<FluxCertificate> {
    a.require_elliptic()?;
    check_grids(a, &[w, f])?;
    let g = a.grid();
    let vg = g.vgrid();
    let r = f.combine(1.0, &apply_y(w), -1.0)?;
    let mut j = VFlux::zeros(g);
    let mut residual = vec![0.0; g.len()];
    let mut shared: Option<BandedLu> = None;
    let mut phi = vec![0.0; vg.count];
    for it in 0..g.n_t() {
        for ix in 0..g.x_count() {
            let coef = slice_coef(a, ix, it);
            let w_slice = w.v_slice(ix, it);
            let r_slice = r.v_slice(ix, it);
            let (op, lift) = vg.dirichlet_system(&coef, w_slice);
            let lu = if same_slice_coefficients(a, ix, it) {
                if shared.is_none() {
                    shared = Some(BandedLu::factor(&op)?);
                }
                None
            } else {
                Some(BandedLu::factor(&op)?)
            };
            // -div(A∇φ) = -(f - Yw)
            let mut rhs: Vec<f64> = vg.interior.iter().zip(&lift).map(|(&iv, l)| -r_slice[iv] - l).collect();
            lu.as_ref().or(shared.as_ref()).expect("factorization present").solve_in_place(&mut rhs);
            phi.copy_from_slice(w_slice);
            for (&iv, &val) in vg.interior.iter().zip(&rhs) {
                phi[iv] = val;
            }
            let grads: Vec<Vec<f64>> = (0..g.dim()).map(|k| vg.gradient(&phi, k)).collect();
            j.set_slice(ix, it, &grads);
            let d_phi = vg.apply_diffusion(&coef, &phi);
            let base = g.node(0, ix, it);
            for &iv in &vg.interior {
                residual[base + iv] = -d_phi[iv] - r_slice[iv];
            }
        }
    }
    let divergence_residual = norm_hm1_v(&ScalarField::new(g.clone(), residual)?)?;
    Ok(FluxCertificate { j, divergence_residual })
}

/// `𝒥[u, j] = ∭ ½ A(∇_v u - j) · (∇_v u - j)`.
pub fn eval_j_pair(u: &ScalarField, j: &VFlux, a: &CoefficientField) -> Result<f64> {
    check_grids(a, &[u])?;
    if j.grid() != a.grid() {
        return Err(Error::ShapeMismatch("flux and coefficients live on different grids".into()));
    }
    let diff = VFlux::gradient_of(u).combine(1.0, j, -1.0)?;
    Ok(0.5 * energy(a, &diff, &diff))
}

/// `∭ A ξ · η` over the whole grid.
fn energy(a: &CoefficientField, xi: &VFlux, eta: &VFlux) -> f64 {
    let g = a.grid();
    let vg = g.vgrid();
    let mut total = 0.0;
    for it in 0..g.n_t() {
        for ix in 0..g.x_count() {
            let w = g.x_weight(ix) * g.t_weight(it);
            total += w * vg.energy(&slice_coef(a, ix, it), &xi.slice(ix, it), &eta.slice(ix, it));
        }
    }
    total
}

/// `J[w, f] = inf_j 𝒥[w, j]` over fluxes with `div_v(A j) = f - Y w`.
pub fn eval_j(w: &ScalarField, f: &ScalarField, a: &CoefficientField) -> Result<f64> {
    let cert = recover_flux(w, f, a)?;
    eval_j_pair(w, &cert.j, a)
}

fn require_test_class(phi: &ScalarField) -> Result<()> {
    let g = phi.grid();
    let scale = 1e-12 * (1.0 + phi.max_abs());
    for node in 0..g.len() {
        let (iv, _, _) = g.split(node);
        if g.is_v_boundary(iv) && phi.values()[node].abs() > scale {
            return Err(Error::NotInTestClass("test function does not vanish on the velocity boundary".into()));
        }
    }
    Ok(())
}

/// `∭ A∇_v u · ∇_v φ + ∬ ⟨f - Y u | φ⟩`, zero when `u` solves `𝓛u = f`
/// weakly. `φ` must vanish on `∂Ω_v`.
pub fn weak_residual(u: &ScalarField, f: &ScalarField, a: &CoefficientField, phi: &ScalarField) -> Result<f64> {
    check_grids(a, &[u, f, phi])?;
    require_test_class(phi)?;
    let g = a.grid();
    let y = apply_y(u);
    let pairing: f64 = (0..g.len()).map(|n| g.weight(n) * (f.values()[n] - y.values()[n]) * phi.values()[n]).sum();
    Ok(energy(a, &VFlux::gradient_of(u), &VFlux::gradient_of(phi)) + pairing)
}

/// `∭ A∇_v u · ∇_v(w - u) + ∬ ⟨f - Y u | w - u⟩` for an admissible
/// competitor: `w ≥ ψ` everywhere and `w = u` on the Kolmogorov boundary.
/// Nonnegative (up to solver tolerance) when `u` solves the obstacle
/// problem.
pub fn variational_inequality_gap(
    u: &ScalarField,
    w: &ScalarField,
    f: &ScalarField,
    psi: &ScalarField,
    a: &CoefficientField,
) -> Result<f64> {
    check_grids(a, &[u, w, f, psi])?;
    let g = a.grid();
    let scale = 1e-12 * (1.0 + u.max_abs() + w.max_abs());
    for node in 0..g.len() {
        let (wn, un) = (w.values()[node], u.values()[node]);
        if wn < psi.values()[node] - scale {
            return Err(Error::InadmissibleCompetitor("competitor lies below the obstacle".into()));
        }
        if g.is_kolmogorov_node(node) && (wn - un).abs() > scale {
            return Err(Error::InadmissibleCompetitor("competitor differs from u on the Kolmogorov boundary".into()));
        }
    }
    let mut phi = w.combine(1.0, u, -1.0)?;
    for node in 0..g.len() {
        if g.is_kolmogorov_node(node) {
            phi.values_mut()[node] = 0.0;
        }
    }
    weak_residual(u, f, a, &phi)
}

/// `w ≥ -1e-12` at every grid node inside `region`.
pub fn is_nonneg_w(w: &ScalarField, region: &BoxDomain) -> Result<bool> {
    let g: &GridSpec = w.grid();
    if region.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: region.dim() });
    }
    let inside = |lo: &[f64], hi: &[f64], p: &[f64]| {
        p.iter().zip(lo.iter().zip(hi)).all(|(c, (l, h))| *c >= l - 1e-12 * (1.0 + l.abs()) && *c <= h + 1e-12 * (1.0 + h.abs()))
    };
    for node in 0..g.len() {
        let p = g.point(node);
        let t_ok = p.t >= region.t_lo - 1e-12 * (1.0 + region.t_lo.abs()) && p.t <= region.t_hi + 1e-12 * (1.0 + region.t_hi.abs());
        if t_ok
            && inside(&region.v_lo, &region.v_hi, &p.v)
            && inside(&region.x_lo, &region.x_hi, &p.x)
            && w.values()[node] < -1e-12
        {
            return Ok(false);
        }
    }
    Ok(true)
}
