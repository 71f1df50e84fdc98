use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods are inherent once std is linked
use num_traits::Float;

use super::{GridSpec, ScalarField};
use crate::linalg::BandedLu;
use crate::{Error, Result};

fn identity_coef(_: usize, k: usize, l: usize) -> f64 {
    if k == l {
        1.0
    } else {
        0.0
    }
}

/// Weighted discrete `L²` pairing `∭ a b`.
pub fn pairing(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.check_same_grid(b)?;
    let g = a.grid();
    Ok((0..g.len()).map(|n| g.weight(n) * a.values()[n] * b.values()[n]).sum())
}

/// Trapezoidal `‖u‖_{L²(Ω_xt, L²(Ω_v))}`.
pub fn norm_l2(u: &ScalarField) -> f64 {
    pairing(u, u).unwrap_or(0.0).sqrt()
}

/// Aggregates per-slice quantities `s(x,t)` as `(∬ s² dx dt)^{1/2}`.
fn aggregate(g: &GridSpec, per_slice: impl Fn(usize, usize) -> f64) -> f64 {
    let mut total = 0.0;
    for it in 0..g.n_t() {
        for ix in 0..g.x_count() {
            let s = per_slice(ix, it);
            total += g.x_weight(ix) * g.t_weight(it) * s * s;
        }
    }
    total.sqrt()
}

fn slice_l2(g: &GridSpec, slice: &[f64]) -> f64 {
    slice.iter().enumerate().map(|(iv, a)| g.v_weight(iv) * a * a).sum::<f64>().sqrt()
}

/// `‖u‖_{L²(Ω_xt, H¹(Ω_v))}` with the slice norm
/// `‖h‖_{H¹} = ‖h‖_{L²} + ‖∇_v h‖_{L²}`.
pub fn norm_h1_v(u: &ScalarField) -> f64 {
    let g = u.grid();
    let vg = g.vgrid();
    aggregate(g, |ix, it| {
        let slice = u.v_slice(ix, it);
        let grads: Vec<Vec<f64>> = (0..g.dim()).map(|k| vg.gradient(slice, k)).collect();
        slice_l2(g, slice) + vg.energy(&identity_coef, &grads, &grads).sqrt()
    })
}

/// Per-slice `‖g(·,x,t)‖_{H^{-1}(Ω_v)}`, realized as `‖∇_v w‖` where
/// `-Δ_v w = g` with `w = 0` on `∂Ω_v`.
pub(crate) fn hm1_slices(g_field: &ScalarField) -> Result<Vec<f64>> {
    let g = g_field.grid();
    let vg = g.vgrid();
    let zeros = vec![0.0; vg.count];
    let (lap, _) = vg.dirichlet_system(&identity_coef, &zeros);
    let lu = BandedLu::factor(&lap)?;
    let mut out = Vec::with_capacity(g.x_count() * g.n_t());
    let mut w = vec![0.0; vg.count];
    for it in 0..g.n_t() {
        for ix in 0..g.x_count() {
            let slice = g_field.v_slice(ix, it);
            let mut rhs: Vec<f64> = vg.interior.iter().map(|&iv| slice[iv]).collect();
            lu.solve_in_place(&mut rhs);
            for (r, &iv) in vg.interior.iter().enumerate() {
                w[iv] = rhs[r];
            }
            let grads: Vec<Vec<f64>> = (0..g.dim()).map(|k| vg.gradient(&w, k)).collect();
            out.push(vg.energy(&identity_coef, &grads, &grads).sqrt());
        }
    }
    Ok(out)
}

/// `‖g‖_{L²(Ω_xt, H^{-1}(Ω_v))}` through the Riesz map of the Dirichlet
/// Laplacian in `v`. Values on `∂Ω_v` do not contribute.
pub fn norm_hm1_v(g_field: &ScalarField) -> Result<f64> {
    let g = g_field.grid();
    let per = hm1_slices(g_field)?;
    Ok(aggregate(g, |ix, it| per[ix + g.x_count() * it]))
}

/// Discrete transport `Y u = v · ∇_x u - ∂_t u`.
///
/// `v_k ∂_{x_k} u` uses the one-sided difference towards the face where
/// `v · N_x > 0` (forward for `v_k > 0`, backward for `v_k < 0`), and `∂_t`
/// the backward difference; where that neighbour is missing the other side
/// is used.
pub fn apply_y(u: &ScalarField) -> ScalarField {
    let g = u.grid();
    let d = g.dim();
    let vals = u.values();
    let vc = g.v_count();
    let ll = g.level_len();
    let mut out = vec![0.0; g.len()];
    for (node, o) in out.iter_mut().enumerate() {
        let (iv, ix, it) = g.split(node);
        let mut acc = 0.0;
        for k in 0..d {
            let v = g.v_coord(iv, k);
            if v == 0.0 {
                continue;
            }
            let i = g.x_index(ix, k);
            let n = g.n_x()[k];
            let s = vc * g.x_strides()[k];
            let forward = if v > 0.0 { i + 1 < n } else { i == 0 };
            let diff = if forward { vals[node + s] - vals[node] } else { vals[node] - vals[node - s] };
            acc += v * diff / g.h_x()[k];
        }
        let dt = if it > 0 { vals[node] - vals[node - ll] } else { vals[node + ll] - vals[node] };
        *o = acc - dt / g.h_t();
    }
    ScalarField::new(g.clone(), out).expect("transport of a finite field is finite")
}

/// `‖u‖_W = ‖u‖_{L²(H¹_v)} + ‖Y u‖_{L²(H^{-1}_v)}`.
pub fn norm_w(u: &ScalarField) -> Result<f64> {
    Ok(norm_h1_v(u) + norm_hm1_v(&apply_y(u))?)
}

/// `‖u‖_{L²} / ‖∇_v u‖_{L²}` for fields vanishing on `∂Ω_v`.
pub fn poincare_ratio(u: &ScalarField) -> Result<f64> {
    let g = u.grid();
    let scale = 1.0 + u.max_abs();
    for node in 0..g.len() {
        let (iv, _, _) = g.split(node);
        if g.is_v_boundary(iv) && u.values()[node].abs() > 1e-12 * scale {
            return Err(Error::NotInTestClass("field does not vanish on the velocity boundary".into()));
        }
    }
    let vg = g.vgrid();
    let grad = aggregate(g, |ix, it| {
        let slice = u.v_slice(ix, it);
        let grads: Vec<Vec<f64>> = (0..g.dim()).map(|k| vg.gradient(slice, k)).collect();
        vg.energy(&identity_coef, &grads, &grads).sqrt()
    });
    if !(grad > 0.0) {
        return Err(Error::ZeroGradient);
    }
    Ok(norm_l2(u) / grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn unit(n: usize) -> GridSpec {
        GridSpec::uniform(BoxDomain::unit(1), n).unwrap()
    }

    fn v_only(n: usize, nv: usize) -> GridSpec {
        GridSpec::new(BoxDomain::unit(1), vec![nv], vec![n], n).unwrap()
    }

    #[test]
    fn l2_examples() {
        let g = unit(33);
        assert_eq!(norm_l2(&ScalarField::zeros(&g)), 0.0);
        assert_relative_eq!(norm_l2(&ScalarField::constant(&g, 1.0)), 1.0, epsilon = 1e-12);
        let u = ScalarField::from_fn(&g, |v, _, _| v[0]);
        let h = g.h_v()[0];
        assert!((norm_l2(&u) - 1.0 / 3f64.sqrt()).abs() < h * h);
    }

    #[test]
    fn h1_examples() {
        let g = unit(33);
        assert_eq!(norm_h1_v(&ScalarField::zeros(&g)), 0.0);
        assert_relative_eq!(norm_h1_v(&ScalarField::constant(&g, 2.5)), 2.5, epsilon = 1e-12);
        let u = ScalarField::from_fn(&g, |v, _, _| v[0]);
        let h = g.h_v()[0];
        assert!((norm_h1_v(&u) - (1.0 / 3f64.sqrt() + 1.0)).abs() < h * h);
    }

    #[test]
    fn hm1_examples() {
        let g = v_only(4, 65);
        let h = g.h_v()[0];
        assert_eq!(norm_hm1_v(&ScalarField::zeros(&g)).unwrap(), 0.0);
        // -w'' = 1, w = v(1-v)/2, ‖w'‖ = 1/(2√3)
        let one = ScalarField::constant(&g, 1.0);
        assert!((norm_hm1_v(&one).unwrap() - 0.5 / 3f64.sqrt()).abs() < h * h);
        // eigenfunction: ‖sin(πv)‖_{H^-1} = ‖sin(πv)‖_{L²}/π = 1/(π√2)
        let s = ScalarField::from_fn(&g, |v, _, _| (PI * v[0]).sin());
        assert!((norm_hm1_v(&s).unwrap() - 1.0 / (PI * 2f64.sqrt())).abs() < 2.0 * h * h);
    }

    #[test]
    fn transport_examples() {
        let dom = BoxDomain::new(vec![-1.0], vec![1.0], vec![0.0], vec![2.0], 0.0, 1.0).unwrap();
        let g = GridSpec::uniform(dom, 7).unwrap();
        let c = apply_y(&ScalarField::constant(&g, 4.0));
        assert!(c.values().iter().all(|&a| a == 0.0));
        let ux = apply_y(&ScalarField::from_fn(&g, |_, x, _| x[0]));
        for node in 0..g.len() {
            let v = g.point(node).v[0];
            assert!((ux.values()[node] - v).abs() < 1e-12);
        }
        let ut = apply_y(&ScalarField::from_fn(&g, |_, _, t| t));
        assert!(ut.values().iter().all(|&a| (a + 1.0).abs() < 1e-12));
    }

    #[test]
    fn w_norm_examples() {
        let g = unit(17);
        assert_eq!(norm_w(&ScalarField::zeros(&g)).unwrap(), 0.0);
        assert_relative_eq!(norm_w(&ScalarField::constant(&g, 3.0)).unwrap(), 3.0, epsilon = 1e-12);
        let u = ScalarField::from_fn(&g, |v, _, _| v[0]);
        assert_relative_eq!(norm_w(&u).unwrap(), norm_h1_v(&u), epsilon = 1e-12);
    }

    #[test]
    fn poincare_examples() {
        let g = v_only(4, 129);
        let h = g.h_v()[0];
        let s = ScalarField::from_fn(&g, |v, _, _| (PI * v[0]).sin());
        assert!((poincare_ratio(&s).unwrap() - 1.0 / PI).abs() < h * h);
        let q = ScalarField::from_fn(&g, |v, _, _| v[0] * (1.0 - v[0]));
        assert!((poincare_ratio(&q).unwrap() - 1.0 / 10f64.sqrt()).abs() < h * h);
        assert_eq!(poincare_ratio(&ScalarField::zeros(&g)), Err(Error::ZeroGradient));
        let bad = ScalarField::constant(&g, 1.0);
        assert!(matches!(poincare_ratio(&bad), Err(Error::NotInTestClass(_))));
    }
}
