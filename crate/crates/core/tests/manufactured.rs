use std::f64::consts::PI;

use kolmo_core::coefficients::{make_coefficients, CoefficientKind};
use kolmo_core::fields::{GridSpec, ScalarField};
use kolmo_core::geometry::BoxDomain;
use kolmo_core::obstacle::{march, SolverConfig};

fn exact(v: &[f64], x: &[f64], t: f64) -> f64 {
    (PI * v[0]).sin() * x[0].cos() * (-t).exp()
}

fn rhs(v: &[f64], x: &[f64], t: f64) -> f64 {
    (1.0 - PI * PI) * exact(v, x, t) - v[0] * (PI * v[0]).sin() * x[0].sin() * (-t).exp()
}

fn error_at(n: usize) -> f64 {
    let grid = GridSpec::uniform(BoxDomain::unit(1), n).unwrap();
    let a = make_coefficients(&CoefficientKind::Identity, &grid).unwrap();
    let f = ScalarField::from_fn(&grid, rhs);
    let g = ScalarField::from_fn(&grid, exact);
    let psi = ScalarField::constant(&grid, -1e6);
    let (u, _) = march(&a, &f, &psi, &g, &SolverConfig::default()).unwrap();
    u.max_abs_diff(&g).unwrap()
}

#[test]
fn manufactured_solution_converges_at_first_order() {
    let errors: Vec<f64> = [16, 32, 64].iter().map(|&n| error_at(n)).collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "errors {errors:?}");
    }
}
