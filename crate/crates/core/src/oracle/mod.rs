//! Optimal-stopping oracle for the constant-coefficient case `A = I`,
//! `f = 0`, driven by the kinetic Langevin process
//!
//! ```text
//! dV = sqrt(2) dW,    dX = V dt.
//! ```
//!
//! Time convention: the obstacle solver marches forward in its `t`
//! coordinate from data at `t_lo`, while the stopping problem runs backward
//! from the horizon. Throughout this module the solver's `t - t_lo` is the
//! *time to horizon*, so level `k` of a field holds the value of a stopping
//! problem with `k` remaining steps, and level `0` is the payoff itself.

mod compare;
mod dp;
mod lsmc;
mod paths;
mod quadrature;

pub use compare::{compare_with_pde, GapReport, ProbeBox};
pub use dp::{value_by_dynamic_programming, DpConfig, DpResult};
pub use lsmc::{dirichlet_exit_value, european_value, lsmc_value, LsmcConfig, StoppingValue};
pub use paths::{simulate_paths, transition, PathBatch};
pub use quadrature::gauss_hermite;

/// Payoff clipping bound; larger magnitudes are treated as unbounded.
pub const PAYOFF_CLIP: f64 = 1e12;
