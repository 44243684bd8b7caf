//! Risk reports on external samples read from CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use bregman_risk::estimators::{clt_interval, RiskMeasure, VarianceSource};
use bregman_risk::ingest::{read_sample_file, RowWarning};
use bregman_risk::{BregmanGenerator, EmpiricalSample, RiskError};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub alpha: f64,
    pub measure: String,
    pub point: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Reason the measure was skipped or its interval omitted.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub source: String,
    pub n: usize,
    pub level: f64,
    pub warnings: Vec<RowWarning>,
    pub rows: Vec<ReportRow>,
}

impl RiskReport {
    pub fn row(&self, alpha: f64, measure: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.measure == measure)
    }
}

/// Report data must lie entirely in the generator's domain, not only its tail.
fn whole_sample_in_domain(sample: &EmpiricalSample, g: &BregmanGenerator) -> bregman_risk::Result<()> {
    sample
        .values()
        .iter()
        .enumerate()
        .try_for_each(|(i, &x)| g.check_domain(&format!("values[{i}]"), x))
}

/// Quantile, classical superquantile and each generator's superquantile,
/// with empirical-mode intervals, for every level.
pub fn report_sample(
    sample: &EmpiricalSample,
    alphas: &[f64],
    generators: &[BregmanGenerator],
    level: f64,
) -> Vec<ReportRow> {
    let mut measures = vec![RiskMeasure::Quantile, RiskMeasure::Superquantile];
    measures.extend(generators.iter().cloned().map(RiskMeasure::Bregman));
    let mut rows = Vec::new();
    for &alpha in alphas {
        for m in &measures {
            let mut row = ReportRow {
                alpha,
                measure: m.to_string(),
                point: None,
                ci_low: None,
                ci_high: None,
                note: None,
            };
            let checked = match m {
                RiskMeasure::Bregman(g) => whole_sample_in_domain(sample, g),
                _ => Ok(()),
            };
            match checked.and_then(|_| m.estimate(sample, alpha)) {
                Err(e) => row.note = Some(format!("skipped: {e}")),
                Ok(est) => {
                    row.point = Some(est.point);
                    match clt_interval(&est, VarianceSource::Empirical(sample), &m.generator(), level) {
                        Ok(ci) => {
                            row.ci_low = ci.ci_low;
                            row.ci_high = ci.ci_high;
                        }
                        Err(e) => row.note = Some(e.to_string()),
                    }
                }
            }
            rows.push(row);
        }
    }
    rows
}

pub fn report_risks(
    csv_path: &Path,
    alphas: &[f64],
    generators: &[BregmanGenerator],
    level: f64,
) -> Result<RiskReport> {
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(CliError::Validation("levels must lie in (0, 1)".into()));
    }
    let ingested = read_sample_file(csv_path).map_err(|e| match e {
        RiskError::Parse { .. } => CliError::Validation(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    if ingested.sample.len() < 2 {
        return Err(CliError::Validation(format!(
            "{} holds {} usable value(s); at least 2 are needed",
            csv_path.display(),
            ingested.sample.len()
        )));
    }
    Ok(RiskReport {
        source: csv_path.display().to_string(),
        n: ingested.sample.len(),
        level,
        warnings: ingested.warnings,
        rows: report_sample(&ingested.sample, alphas, generators, level),
    })
}
