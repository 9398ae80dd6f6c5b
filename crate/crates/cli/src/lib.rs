//! Command-line front end: droplet curves, Fekete points, verification
//! reports, 1D spectra and moments as CSV/JSON plot data.
// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
