//! File formats, configuration and the command-line driver for
//! `pursuit-core`.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{execute, Report};
pub use config::{Cli, Command, Format, RunConfig};
pub use error::{LabError, Result};

/// Encode a report in the configured format.
pub fn encode(cfg: &RunConfig, report: &Report) -> Result<Vec<u8>> {
    match cfg.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => report.table.to_json(cfg.command.name(), serde_json::to_value(cfg)?),
    }
}

/// Execute and write every requested output. Notes go to standard error.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let report = execute(cfg)?;
    let bytes = encode(cfg, &report)?;
    match &cfg.output {
        Some(path) => output::write_atomic(path, &bytes)?,
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|source| LabError::Write { path: "<stdout>".into(), source })?,
    }
    if let (Some(path), Some(plot)) = (&cfg.svg, &report.plot) {
        output::write_atomic(path, plot.render().as_bytes())?;
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    Ok(report)
}

/// Parse `args`, run, and return the process exit code: 0 on success, 1 for
/// invalid input, 2 for numerical failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (command, opts) = cli.command.split();
    match RunConfig::resolve(command, opts).and_then(|cfg| run(&cfg)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
