//! CSV emission for sweep results.
//!
//! Every CSV starts with the effective configuration echoed as
//! `# key = value` comment lines. The record schema is fixed:
//!
//! `n,m,s,snr_db,trial,method,fdp,power,f1,relative_error,measurement_error,support_size,runtime_ms,status`
//!
//! Output bytes are a pure function of (config, seed): the `runtime_ms`
//! column is written as 0 in the files (wall-clock timing stays on the
//! in-memory records and is reported separately), since measured times
//! would break byte-level reproducibility of repeated runs.

use std::path::{Path, PathBuf};

use super::{RunRecord, SummaryRow, SweepResult};
use crate::error::Result;
use crate::io::format_f64;

pub const RESULTS_HEADER: &str =
    "n,m,s,snr_db,trial,method,fdp,power,f1,relative_error,measurement_error,support_size,runtime_ms,status";

pub const SUMMARY_HEADER: &str = "n,m,s,snr_db,method,n_ok,fdp_mean,fdp_se,power_mean,power_se,f1_mean,f1_se,relative_error_mean,relative_error_se,measurement_error_mean,measurement_error_se,support_size_mean,runtime_ms_mean";

fn echo_block(result: &SweepResult) -> String {
    let mut out = String::new();
    for line in result.config.echo_lines() {
        out.push_str("# ");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn record_row(r: &RunRecord) -> String {
    match &r.metrics {
        Some(m) => format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},0,{}",
            r.cell.n,
            r.cell.m,
            r.cell.s,
            r.cell.snr_db,
            r.trial,
            r.method.name(),
            format_f64(m.fdp),
            format_f64(m.power),
            format_f64(m.f1),
            format_f64(m.relative_error),
            format_f64(m.measurement_error),
            m.support_size,
            r.status,
        ),
        None => format!(
            "{},{},{},{},{},{},nan,nan,nan,nan,nan,0,0,{}",
            r.cell.n, r.cell.m, r.cell.s, r.cell.snr_db, r.trial, r.method.name(), r.status,
        ),
    }
}

pub fn results_csv(result: &SweepResult) -> String {
    let mut out = echo_block(result);
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in &result.records {
        out.push_str(&record_row(r));
        out.push('\n');
    }
    out
}

fn summary_row(row: &SummaryRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},0",
        row.cell.n,
        row.cell.m,
        row.cell.s,
        row.cell.snr_db,
        row.method.name(),
        row.n_ok,
        format_f64(row.fdp.mean),
        format_f64(row.fdp.se),
        format_f64(row.power.mean),
        format_f64(row.power.se),
        format_f64(row.f1.mean),
        format_f64(row.f1.se),
        format_f64(row.relative_error.mean),
        format_f64(row.relative_error.se),
        format_f64(row.measurement_error.mean),
        format_f64(row.measurement_error.se),
        format_f64(row.support_size_mean),
    )
}

pub fn summary_csv(result: &SweepResult) -> String {
    let mut out = echo_block(result);
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for row in &result.summary {
        out.push_str(&summary_row(row));
        out.push('\n');
    }
    out
}

/// Write results.csv, summary.csv and the SVG plots into `out_dir`;
/// returns the written paths.
pub fn write_outputs(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let results_path = out_dir.join("results.csv");
    std::fs::write(&results_path, results_csv(result))?;
    written.push(results_path);
    let summary_path = out_dir.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(result))?;
    written.push(summary_path);
    written.extend(super::emit_plots(&result.summary, out_dir)?);
    Ok(written)
}
