//! Configuration, artifact formats and run orchestration for the `kolmo`
//! command-line tool. The numerics live in `kolmo-core`.

// `!(a > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod expr;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_str, Mode, RunConfig};
pub use error::CliError;
pub use run::run;
