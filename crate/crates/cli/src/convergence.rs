//! Convergence studies: repeated estimation over a grid of sample sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bregman_risk::assumptions::normality_violated;
use bregman_risk::estimators::{EmpiricalSample, RiskMeasure};
use bregman_risk::numeric::two_sided_z;
use bregman_risk::oracle::Oracle;
use bregman_risk::{AnalyticDistribution, RiskError};

use crate::cache::{NoteCode, OracleCache, OracleEntry};
use crate::error::Result;
use crate::manifest::{ExperimentManifest, ReferenceMode, TheoCenter};
use crate::seeds::{job_seed, reference_seed};

/// One estimate from one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub run_id: String,
    pub measure: String,
    pub n: usize,
    pub repetition: usize,
    pub seed: u64,
    pub estimate: Option<f64>,
    pub error: Option<String>,
    pub theo_ci_lo: Option<f64>,
    pub theo_ci_hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    Oracle,
    Sample,
}

/// Reference value and limiting variance of one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReference {
    pub measure: String,
    pub reference: f64,
    pub source: ReferenceSource,
    pub variance: Option<f64>,
    /// Why the theoretical interval is absent, when it is.
    pub note: Option<NoteCode>,
}

/// Statistics over repetitions at one `(measure, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub measure: String,
    pub n: usize,
    pub completed: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub reference: f64,
    pub exp_ci_lo: Option<f64>,
    pub exp_ci_hi: Option<f64>,
    pub theo_ci_lo: Option<f64>,
    pub theo_ci_hi: Option<f64>,
}

impl SummaryRow {
    pub fn exp_half_width(&self) -> Option<f64> {
        Some(0.5 * (self.exp_ci_hi? - self.exp_ci_lo?))
    }

    pub fn theo_half_width(&self) -> Option<f64> {
        Some(0.5 * (self.theo_ci_hi? - self.theo_ci_lo?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub run_id: String,
    pub distribution: String,
    pub alpha: f64,
    pub ci_level: f64,
    pub references: Vec<MeasureReference>,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn rows_for<'a>(&'a self, measure: &'a str) -> impl Iterator<Item = &'a SummaryRow> + 'a {
        self.rows.iter().filter(move |r| r.measure == measure)
    }

    pub fn reference_for(&self, measure: &str) -> Option<&MeasureReference> {
        self.references.iter().find(|r| r.measure == measure)
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub records: Vec<ConvergenceRecord>,
    pub summary: Summary,
}

/// First 16 hex digits of the SHA-256 of the canonical manifest.
pub fn run_id(manifest: &ExperimentManifest) -> String {
    let digest = Sha256::digest(manifest.canonical().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Tail scale on which the normality conditions of a measure are stated;
/// `None` means the identity scale.
fn normality_scale(m: &RiskMeasure) -> Option<Option<bregman_risk::BregmanGenerator>> {
    match m {
        RiskMeasure::Quantile => None,
        RiskMeasure::Superquantile => Some(None),
        RiskMeasure::Bregman(g) if g.is_affine() => Some(None),
        RiskMeasure::Bregman(g) => Some(Some(g.clone())),
    }
}

/// Oracle value and variance of a measure, or why they are missing.
pub fn oracle_entry(d: &AnalyticDistribution, m: &RiskMeasure, alpha: f64) -> OracleEntry {
    let oracle = Oracle::default();
    let value = m.true_value(&oracle, d, alpha).ok().filter(|v| v.is_finite());
    let violated = normality_scale(m).is_some_and(|g| normality_violated(d, g.as_ref()));
    let (variance, variance_note) = if violated {
        (None, Some(NoteCode::NormalityViolated))
    } else {
        match m.asymptotic_variance(&oracle, d, alpha) {
            Ok(v) if v.is_finite() && v > 0.0 => (Some(v), None),
            Ok(_) | Err(RiskError::VarianceDiverges) => (None, Some(NoteCode::VarianceDiverges)),
            Err(_) => (None, Some(NoteCode::OracleFailed)),
        }
    };
    OracleEntry {
        value,
        variance,
        variance_note,
    }
}

fn references(manifest: &ExperimentManifest, cache: &mut OracleCache) -> Result<Vec<MeasureReference>> {
    let d = &manifest.distribution;
    let entries: Vec<OracleEntry> = manifest
        .measures
        .iter()
        .map(|m| {
            let key = OracleCache::key(&d.to_string(), &m.to_string(), manifest.alpha);
            cache.get_or_insert_with(key, || oracle_entry(d, m, manifest.alpha))
        })
        .collect();

    let needs_sample = manifest.reference == ReferenceMode::Sample || entries.iter().any(|e| e.value.is_none());
    let reference_sample = if needs_sample {
        let n = manifest.reference_n;
        Some(EmpiricalSample::new(d.sample(n, reference_seed(manifest.master_seed, n)))?)
    } else {
        None
    };

    manifest
        .measures
        .iter()
        .zip(entries)
        .map(|(m, e)| {
            let (reference, source) = match (manifest.reference, e.value) {
                (ReferenceMode::Oracle, Some(v)) => (v, ReferenceSource::Oracle),
                _ => {
                    let s = reference_sample.as_ref().expect("reference sample drawn");
                    (m.estimate(s, manifest.alpha)?.point, ReferenceSource::Sample)
                }
            };
            Ok(MeasureReference {
                measure: m.to_string(),
                reference,
                source,
                variance: e.variance,
                note: e.variance_note,
            })
        })
        .collect()
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (Some(mean), Some((ss / (k - 1.0)).sqrt()))
}

/// Runs every `(n, repetition)` job on the current rayon pool.
///
/// Each job draws one fresh sample and evaluates all measures on it.
/// Records are ordered by (measure, n, repetition) whatever the completion
/// order, so output is identical for any thread count.
pub fn run_convergence(manifest: &ExperimentManifest, cache: &mut OracleCache) -> Result<ConvergenceRun> {
    manifest.validate()?;
    let run_id = run_id(manifest);
    let refs = references(manifest, cache)?;
    let z = two_sided_z(manifest.ci_level);
    let d = manifest.distribution;
    let alpha = manifest.alpha;

    let jobs: Vec<(usize, usize)> = manifest
        .n_grid
        .iter()
        .flat_map(|&n| (0..manifest.repetitions).map(move |rep| (n, rep)))
        .collect();
    let per_job: Vec<Vec<(usize, ConvergenceRecord)>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let seed = job_seed(manifest.master_seed, n, rep);
            let sample = EmpiricalSample::new(d.sample(n, seed));
            manifest
                .measures
                .iter()
                .enumerate()
                .map(|(mi, m)| {
                    let (estimate, error) = match sample.as_ref().map(|s| m.estimate(s, alpha)) {
                        Ok(Ok(e)) => (Some(e.point), None),
                        Ok(Err(e)) => (None, Some(e.to_string())),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    let theo = refs[mi]
                        .variance
                        .map(|v| (refs[mi].reference, z * (v / n as f64).sqrt()));
                    let record = ConvergenceRecord {
                        run_id: run_id.clone(),
                        measure: m.to_string(),
                        n,
                        repetition: rep,
                        seed,
                        estimate,
                        error,
                        theo_ci_lo: theo.map(|(c, h)| c - h),
                        theo_ci_hi: theo.map(|(c, h)| c + h),
                    };
                    (mi, record)
                })
                .collect()
        })
        .collect();
    let mut keyed: Vec<(usize, ConvergenceRecord)> = per_job.into_iter().flatten().collect();
    keyed.sort_by_key(|(mi, r)| (*mi, r.n, r.repetition));
    let records: Vec<ConvergenceRecord> = keyed.into_iter().map(|(_, r)| r).collect();

    let mut rows = Vec::new();
    for (mi, m) in manifest.measures.iter().enumerate() {
        let label = m.to_string();
        let reference = &refs[mi];
        for &n in &manifest.n_grid {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.measure == label && r.n == n)
                .filter_map(|r| r.estimate)
                .collect();
            let (mean, sd) = mean_sd(&values);
            let exp = mean.zip(sd).map(|(m, s)| (m - z * s, m + z * s));
            let center = match manifest.theo_center {
                TheoCenter::Reference => Some(reference.reference),
                TheoCenter::Mean => mean,
            };
            let theo = center
                .zip(reference.variance)
                .map(|(c, v)| (c - z * (v / n as f64).sqrt(), c + z * (v / n as f64).sqrt()));
            rows.push(SummaryRow {
                measure: label.clone(),
                n,
                completed: values.len(),
                mean,
                sd,
                reference: reference.reference,
                exp_ci_lo: exp.map(|e| e.0),
                exp_ci_hi: exp.map(|e| e.1),
                theo_ci_lo: theo.map(|t| t.0),
                theo_ci_hi: theo.map(|t| t.1),
            });
        }
    }

    Ok(ConvergenceRun {
        records,
        summary: Summary {
            run_id,
            distribution: d.to_string(),
            alpha,
            ci_level: manifest.ci_level,
            references: refs,
            rows,
        },
    })
}

/// Writes per-repetition records as CSV.
pub fn write_records(records: &[ConvergenceRecord], path: &std::path::Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
