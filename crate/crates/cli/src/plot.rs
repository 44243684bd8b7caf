//! Plot data: one row per (measure, n).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convergence::Summary;
use crate::error::{CliError, Result};
use crate::manifest::PlotFormat;

pub const CSV_HEADER: &str = "measure,n,mean,ref,exp_ci_lo,exp_ci_hi,theo_ci_lo,theo_ci_hi";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub measure: String,
    pub n: usize,
    pub mean: Option<f64>,
    #[serde(rename = "ref")]
    pub reference: Option<f64>,
    pub exp_ci_lo: Option<f64>,
    pub exp_ci_hi: Option<f64>,
    pub theo_ci_lo: Option<f64>,
    pub theo_ci_hi: Option<f64>,
}

fn finite(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite())
}

pub fn plot_rows(summary: &Summary) -> Vec<PlotRow> {
    summary
        .rows
        .iter()
        .map(|r| PlotRow {
            measure: r.measure.clone(),
            n: r.n,
            mean: finite(r.mean),
            reference: finite(Some(r.reference)),
            exp_ci_lo: finite(r.exp_ci_lo),
            exp_ci_hi: finite(r.exp_ci_hi),
            theo_ci_lo: finite(r.theo_ci_lo),
            theo_ci_hi: finite(r.theo_ci_hi),
        })
        .collect()
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV text with the fixed header; absent values are empty cells and
/// numbers use the shortest round-tripping decimal form.
pub fn to_csv(rows: &[PlotRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.measure.clone(),
            r.n.to_string(),
            cell(r.mean),
            cell(r.reference),
            cell(r.exp_ci_lo),
            cell(r.exp_ci_hi),
            cell(r.theo_ci_lo),
            cell(r.theo_ci_hi),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[PlotRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

pub fn from_csv(text: &str) -> Result<Vec<PlotRow>> {
    if text.lines().next() != Some(CSV_HEADER) {
        return Err(CliError::Validation("plot data has an unexpected header".into()));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(CliError::from)).collect()
}

pub fn from_json(text: &str) -> Result<Vec<PlotRow>> {
    Ok(serde_json::from_str(text)?)
}

pub fn render(rows: &[PlotRow], format: PlotFormat) -> Result<String> {
    match format {
        PlotFormat::Csv => Ok(to_csv(rows)),
        PlotFormat::Json => to_json(rows),
    }
}

pub fn read_plot_data(path: &Path, format: PlotFormat) -> Result<Vec<PlotRow>> {
    let text = std::fs::read_to_string(path)?;
    match format {
        PlotFormat::Csv => from_csv(&text),
        PlotFormat::Json => from_json(&text),
    }
}

/// Writes the summary as plot data; output bytes depend only on the summary.
pub fn emit_plot_data(summary: &Summary, format: PlotFormat, path: &Path) -> Result<()> {
    let rows = plot_rows(summary);
    if rows.is_empty() {
        return Err(CliError::Runtime("summary has no rows".into()));
    }
    let text = render(&rows, format)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
