//! Command-line front end and std-only services for `weakval-core`:
//! JSON/CSV formats, named presets, a rayon-backed runner for chunked Monte
//! Carlo jobs, and chi-square p-values.

pub mod cli;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod presets;
pub mod report;
pub mod uniformity;

pub use error::CliError;
