//! Report envelope and output sinks.
//!
//! Every JSON report is `{"meta": {...}, "result": {...}}`. `meta` carries the
//! tool version, the subcommand, the seed, hbar, an echo of the parsed
//! configuration and the wall-clock duration; apart from `duration_ms`, the
//! output is a pure function of the configuration.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const TOOL: &str = "weakval";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    pub hbar: f64,
    pub config: Value,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T> {
    pub meta: Meta,
    pub result: T,
}

/// Standard output for `None`, otherwise a freshly created file.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
    })
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, report: &Report<T>) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, report)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Writes serialisable rows with a header derived from the row type.
pub fn write_csv<R: Serialize>(out: &mut dyn Write, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
