//! Numerical kernel for the obstacle problem of the kinetic
//! Kolmogorov-Fokker-Planck operator
//!
//! ```text
//! L u = div_v(A(v,x,t) grad_v u) + v . grad_x u - d_t u
//! ```
//!
//! with merely bounded, measurable, uniformly elliptic diffusion matrices `A`.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It provides
//! the Galilean group structure and Kolmogorov-boundary classification
//! ([`geometry`]), tensor-grid fields and the discrete `L2`, `H1_v`, `H^-1_v`
//! and kinetic `W` norms ([`fields`]), rough coefficient generators
//! ([`coefficients`]), a monotone implicit finite-difference discretization
//! ([`assembly`]), projected SOR and penalized Newton solvers for the
//! resulting complementarity problems ([`obstacle`]), variational
//! diagnostics ([`variational`]) and an independent optimal-stopping oracle
//! driven by the kinetic Langevin process ([`oracle`]).
#![cfg_attr(not(test), no_std)]
// `!(a > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops read closer to the stencil formulas
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod assembly;
pub mod coefficients;
mod error;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod obstacle;
pub mod oracle;
mod stencil;
pub mod variational;

pub use error::{Error, Result};
