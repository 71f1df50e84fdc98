use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// `n`-point Gauss-Hermite rule for expectations under the standard normal
/// law: `E[h(Z)] ≈ Σ w_i h(z_i)`, exact for polynomials of degree `2n - 1`.
/// Nodes come out in decreasing order.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidSampling("Gauss-Hermite order must lie in 1..=64".into()));
    }
    // Newton iteration on the orthonormal Hermite recurrence (weight e^{-x²})
    let pim4 = 0.751_125_544_464_942_5; // π^{-1/4}
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let sqrt_pi = core::f64::consts::PI.sqrt();
    let nodes = x.iter().map(|a| core::f64::consts::SQRT_2 * a).collect();
    let weights = w.iter().map(|a| a / sqrt_pi).collect();
    Ok((nodes, weights))
}
