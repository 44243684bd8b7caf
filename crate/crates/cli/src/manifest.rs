//! Experiment manifests: flat `key = value` files.
//!
//! ```text
//! # convergence study on Exp(1)
//! distribution = exp
//! measures     = superquantile, geometric, harmonic
//! alpha        = 0.95
//! n_min        = 1000
//! n_max        = 100000
//! n_step       = 500
//! scale        = 0.1
//! repetitions  = 50
//! reference_n  = 1000000
//! reference    = oracle
//! master_seed  = 20240101
//! ci_level     = 0.95
//! theo_center  = reference
//! output       = exp.csv
//! format       = csv
//! records      = exp_records.csv
//! oracle_cache = oracle_cache.json
//! ```
//!
//! `scale` multiplies `n_max` and `reference_n` (never below `n_min`), so the
//! default 0.1 runs the grid 1000..10⁴ against a 10⁵ reference. An explicit
//! `n_grid = 1000, 2000, 5000` replaces `n_min/n_max/n_step`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use bregman_risk::{AnalyticDistribution, RiskMeasure};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotFormat {
    Csv,
    Json,
}

impl FromStr for PlotFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(PlotFormat::Csv),
            "json" => Ok(PlotFormat::Json),
            _ => Err(CliError::Validation(format!("format must be csv or json, got {s:?}"))),
        }
    }
}

/// Where the reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Quadrature oracle, falling back to a reference sample when the
    /// oracle value is not finite.
    Oracle,
    /// Always a `reference_n`-size sample estimate.
    Sample,
}

/// Center of the theoretical interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoCenter {
    Reference,
    Mean,
}

#[derive(Debug, Clone)]
pub struct ExperimentManifest {
    pub distribution: AnalyticDistribution,
    pub measures: Vec<RiskMeasure>,
    pub alpha: f64,
    pub n_grid: Vec<usize>,
    pub repetitions: usize,
    pub reference_n: usize,
    pub reference: ReferenceMode,
    pub master_seed: u64,
    pub ci_level: f64,
    pub theo_center: TheoCenter,
    pub output: Option<PathBuf>,
    pub format: PlotFormat,
    pub records: Option<PathBuf>,
    pub oracle_cache: Option<PathBuf>,
}

/// Raw, unscaled manifest keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestSource {
    entries: BTreeMap<String, String>,
    base_dir: PathBuf,
}

const KNOWN_KEYS: &[&str] = &[
    "distribution",
    "measures",
    "alpha",
    "n_min",
    "n_max",
    "n_step",
    "n_grid",
    "scale",
    "repetitions",
    "reference_n",
    "reference",
    "master_seed",
    "ci_level",
    "theo_center",
    "output",
    "format",
    "records",
    "oracle_cache",
];

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl ManifestSource {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(invalid(format!("line {}: unknown key {key:?}", i + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(invalid(format!("line {}: duplicate key {key:?}", i + 1)));
            }
        }
        Ok(Self {
            entries,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read manifest {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| invalid(format!("{key} = {v:?}: {e}"))),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.entries.get(key).filter(|v| !v.is_empty()).map(|v| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                self.base_dir.join(p)
            }
        })
    }

    /// Applies defaults and `scale`, then validates.
    pub fn resolve(&self) -> Result<ExperimentManifest> {
        let distribution: AnalyticDistribution = self
            .entries
            .get("distribution")
            .ok_or_else(|| invalid("missing key distribution"))?
            .parse()
            .map_err(|e| invalid(format!("distribution: {e}")))?;
        let measures = self
            .entries
            .get("measures")
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<RiskMeasure>().map_err(|e| invalid(format!("measures: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?
            .unwrap_or_default();
        if measures.is_empty() {
            return Err(invalid("measures must list at least one measure"));
        }

        let scale: f64 = self.get("scale", 0.1)?;
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(invalid(format!("scale must lie in (0, 1], got {scale}")));
        }
        let scaled = |n: usize| (n as f64 * scale).round() as usize;
        let n_grid = match self.entries.get("n_grid") {
            Some(list) => list
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| invalid(format!("n_grid: {e}"))))
                .collect::<Result<Vec<_>>>()?,
            None => {
                let n_min: usize = self.get("n_min", 1000)?;
                let n_max: usize = self.get("n_max", 100_000)?;
                let n_step: usize = self.get("n_step", 500)?;
                if n_step == 0 {
                    return Err(invalid("n_step must be positive"));
                }
                let top = scaled(n_max).max(n_min);
                (n_min..=top).step_by(n_step).collect()
            }
        };
        let reference_n = scaled(self.get("reference_n", 1_000_000)?);

        let manifest = ExperimentManifest {
            distribution,
            measures,
            alpha: self.get("alpha", 0.95)?,
            n_grid,
            repetitions: self.get("repetitions", 50)?,
            reference_n,
            reference: match self.entries.get("reference").map(String::as_str) {
                None | Some("oracle") => ReferenceMode::Oracle,
                Some("sample") => ReferenceMode::Sample,
                Some(other) => return Err(invalid(format!("reference must be oracle or sample, got {other:?}"))),
            },
            master_seed: self.get("master_seed", 0)?,
            ci_level: self.get("ci_level", 0.95)?,
            theo_center: match self.entries.get("theo_center").map(String::as_str) {
                None | Some("reference") => TheoCenter::Reference,
                Some("mean") => TheoCenter::Mean,
                Some(other) => return Err(invalid(format!("theo_center must be reference or mean, got {other:?}"))),
            },
            output: self.path("output"),
            format: self.get("format", PlotFormat::Csv)?,
            records: self.path("records"),
            oracle_cache: self.path("oracle_cache"),
        };
        manifest.validate()?;
        Ok(manifest)
    }
}

impl ExperimentManifest {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(invalid(format!("ci_level must lie in (0, 1), got {}", self.ci_level)));
        }
        if self.measures.is_empty() {
            return Err(invalid("measures must list at least one measure"));
        }
        if self.n_grid.is_empty() {
            return Err(invalid("sample-size grid is empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sample-size grid must be strictly increasing"));
        }
        if self.n_grid[0] < 2 {
            return Err(invalid("sample sizes must be at least 2"));
        }
        if self.repetitions < 2 {
            return Err(invalid(format!("repetitions must be at least 2, got {}", self.repetitions)));
        }
        let n_max = *self.n_grid.last().expect("nonempty grid");
        if self.reference_n <= n_max {
            return Err(invalid(format!(
                "reference_n ({}) must exceed the largest sample size ({n_max})",
                self.reference_n
            )));
        }
        Ok(())
    }

    /// Canonical text of every setting that affects results.
    pub fn canonical(&self) -> String {
        let measures: Vec<String> = self.measures.iter().map(|m| m.to_string()).collect();
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        format!(
            "distribution={}\nmeasures={}\nalpha={}\nn_grid={}\nrepetitions={}\nreference_n={}\nreference={:?}\nmaster_seed={}\nci_level={}\ntheo_center={:?}\n",
            self.distribution,
            measures.join(","),
            self.alpha,
            grid.join(","),
            self.repetitions,
            self.reference_n,
            self.reference,
            self.master_seed,
            self.ci_level,
            self.theo_center,
        )
    }
}
