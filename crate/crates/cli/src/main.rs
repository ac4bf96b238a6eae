//! Command-line front end: verification suites and experiments with JSON and
//! CSV reports. Exit status 0 when every case passes, 1 on a numerical
//! failure, 2 on a configuration error.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Flat DtN and sphere profile-fit multipliers against the closed forms.
    VerifyMultiplier,
    /// Bubble Euler–Lagrange residual over a box-size sweep.
    Bubble,
    /// Per-mode energy identity, refinement order and Sobolev gaps.
    Energy,
    /// Sphere Q operator: digamma formula against a finite difference in λ.
    QOperator,
    /// Yamabe quotient minimization from the bubble and from random data.
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingArg {
    Absolute,
    Signed,
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "fracdirac", version, about = "Verification suites for conformal fractional Dirac operators")]
pub struct Config {
    #[arg(long, value_enum)]
    pub cmd: Command,
    /// Dimension (restricts the case list where a command sweeps n).
    #[arg(long)]
    pub n: Option<usize>,
    /// Order parameter λ (restricts the case list where a command sweeps λ).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Box side for flat experiments.
    #[arg(long = "L")]
    pub box_side: Option<f64>,
    /// Points per axis for flat experiments (power of two).
    #[arg(long)]
    pub m: Option<usize>,
    /// Graded-grid points for the extension ODE.
    #[arg(long = "M")]
    pub points: Option<usize>,
    /// Extension cut-off in units of 1/|ξ| (T_max = Tmax/|ξ|).
    #[arg(long = "Tmax")]
    pub t_max: Option<f64>,
    /// Grade exponent of the extension grid.
    #[arg(long)]
    pub grade: Option<f64>,
    /// Batch of extension modes, CSV with header n,lambda,xi,s.
    #[arg(long)]
    pub modes_file: Option<PathBuf>,
    /// JSON report path; CSV companions are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report to stdout when no --out is given.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optimizer iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Denominator pairing of the Yamabe quotient.
    #[arg(long, value_enum)]
    pub pairing: Option<PairingArg>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] fracdirac::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// A CSV table written next to the report.
pub struct Table {
    pub suffix: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
}

fn companion(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}{suffix}.csv"))
}

fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(&table.header)?;
    for row in &table.rows {
        wtr.write_record(row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn cases_table(report: &Report) -> Table {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    Table {
        suffix: "",
        header: ["index", "label", "computed", "oracle", "rel_err", "tolerance", "pass"]
            .map(String::from)
            .to_vec(),
        rows: report
            .cases
            .iter()
            .map(|c| {
                vec![
                    c.index.to_string(),
                    c.label.clone(),
                    fmt(c.computed),
                    fmt(c.oracle),
                    fmt(c.rel_err),
                    format!("{:.16e}", c.tolerance),
                    c.pass.to_string(),
                ]
            })
            .collect(),
    }
}

fn print_summary(report: &Report) {
    for c in report.cases.iter().filter(|c| !c.pass) {
        let detail = match (&c.error, c.rel_err) {
            (Some(e), _) => e.clone(),
            (None, Some(v)) => format!("value {v:.3e}, tolerance {:.1e}", c.tolerance),
            (None, None) => String::new(),
        };
        println!("FAIL [{}] {}: {detail}", c.index, c.label);
    }
    let s = &report.summary;
    let max = s.max_rel_err.map(|e| format!(", max rel err {e:.3e}")).unwrap_or_default();
    println!(
        "{}: {}/{} cases passed{max} ({:.2} s)",
        report.command, s.passed, s.cases, report.wall_time_s
    );
}

fn run(config: &Config) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut outcome = commands::dispatch(config)?;
    outcome.report.wall_time_s = start.elapsed().as_secs_f64();
    let report = outcome.report;
    match &config.out {
        Some(out) => {
            File::create(out)?.write_all(&report.to_json()?)?;
            write_table(&companion(out, ""), &cases_table(&report))?;
            for table in &outcome.tables {
                write_table(&companion(out, table.suffix), table)?;
            }
        }
        None if config.json => io::stdout().write_all(&report.to_json()?)?,
        None => {}
    }
    if !(config.json && config.out.is_none()) {
        print_summary(&report);
    }
    Ok(report)
}

fn main() -> ExitCode {
    let config = Config::parse();
    match run(&config) {
        Ok(report) if report.all_pass() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) | CliError::Library(_) => ExitCode::from(2),
                CliError::Io(_) | CliError::Csv(_) => ExitCode::from(1),
            }
        }
    }
}
