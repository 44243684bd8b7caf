use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use bregman_cli::cache::OracleCache;
use bregman_cli::convergence::{oracle_entry, run_convergence, write_records, Summary};
use bregman_cli::manifest::{ManifestSource, PlotFormat};
use bregman_cli::plot::emit_plot_data;
use bregman_cli::report::report_risks;
use bregman_cli::{CliError, Result, THREADS_ENV};
use bregman_risk::assumptions::{check_assumptions_at, Hypothesis, DEFAULT_GRID_DEPTH};
use bregman_risk::coherence::standard_suite;
use bregman_risk::{AnalyticDistribution, BregmanGenerator, RiskMeasure};

#[derive(Parser)]
#[command(name = "bregman", version, about = "Bregman superquantile experiments")]
struct Cli {
    /// Worker threads (default: $BREGMAN_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study described by a manifest file.
    Converge {
        manifest: PathBuf,
        /// Overrides the manifest's scale factor.
        #[arg(long)]
        scale: Option<f64>,
        /// Full-size grid and reference (same as --scale 1).
        #[arg(long, conflicts_with = "scale")]
        full_scale: bool,
        /// Overrides the manifest's plot-data path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the manifest's plot-data format (csv or json).
        #[arg(long)]
        format: Option<String>,
    },
    /// Check the coherence axioms; one JSON report per line.
    Coherence {
        #[arg(long, default_value = "euclidean,geometric,harmonic,exp")]
        generators: String,
        #[arg(long, default_value_t = 0.95)]
        alpha: f64,
        /// Sample size of Monte Carlo checks.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Tabulate the tail conditions H1-H4.
    Assumptions {
        #[arg(long, default_value = "exp,pareto:0.5,pareto:1.5,pareto:2.5")]
        distributions: String,
        /// Generators; `identity` selects the identity scale (H3/H4).
        #[arg(long, default_value = "identity,geometric,harmonic")]
        generators: String,
        #[arg(long, default_value_t = DEFAULT_GRID_DEPTH)]
        depth: u32,
        #[arg(long)]
        json: bool,
    },
    /// Estimate risk measures on a one-column CSV sample.
    Report {
        csv: PathBuf,
        #[arg(long, default_value = "0.95")]
        alphas: String,
        #[arg(long, default_value = "geometric,harmonic")]
        generators: String,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        json: bool,
    },
    /// Reference value and asymptotic variance by quadrature.
    Oracle {
        /// exp | pareto:<a> | uniform | halfcauchy, optionally `*scale+loc`.
        family: String,
        /// quantile | superquantile | a generator name.
        measure: String,
        alpha: f64,
    },
    /// Draw a seeded sample as a one-column CSV.
    Sample {
        family: String,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// `println!` that ends the process quietly when the reader has gone away.
macro_rules! out {
    ($($arg:tt)*) => {
        if let Err(e) = writeln!(std::io::stdout(), $($arg)*) {
            stdout_failed(e)?;
        }
    };
}

fn stdout_failed(e: std::io::Error) -> Result<()> {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        std::process::exit(0);
    }
    Err(e.into())
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| invalid(format!("{s:?}: {e}"))))
        .collect()
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn print_summary(summary: &Summary) -> Result<()> {
    out!("run {}  {}  alpha={}", summary.run_id, summary.distribution, summary.alpha);
    for r in &summary.references {
        let note = r.note.map(|n| format!("  theoretical CI omitted ({n:?})")).unwrap_or_default();
        out!("  {}: reference {} ({:?}){note}", r.measure, r.reference, r.source);
    }
    out!("{:<14} {:>8} {:>14} {:>14} {:>12} {:>12}", "measure", "n", "mean", "ref", "exp_hw", "theo_hw");
    for r in &summary.rows {
        out!(
            "{:<14} {:>8} {:>14} {:>14.6} {:>12} {:>12}",
            r.measure,
            r.n,
            cell(r.mean),
            r.reference,
            cell(r.exp_half_width()),
            cell(r.theo_half_width()),
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Converge {
            manifest,
            scale,
            full_scale,
            output,
            format,
        } => {
            let mut source = ManifestSource::read(&manifest)?;
            if full_scale {
                source.set("scale", "1");
            } else if let Some(s) = scale {
                source.set("scale", s.to_string());
            }
            let mut m = source.resolve()?;
            if let Some(o) = output {
                m.output = Some(o);
            }
            if let Some(f) = format {
                m.format = f.parse::<PlotFormat>()?;
            }
            let mut cache = OracleCache::open(m.oracle_cache.as_deref())?;
            let run = run_convergence(&m, &mut cache)?;
            cache.save()?;
            if let Some(path) = &m.records {
                write_records(&run.records, path)?;
            }
            if let Some(path) = &m.output {
                emit_plot_data(&run.summary, m.format, path)?;
            }
            print_summary(&run.summary)?;
        }
        Command::Coherence {
            generators,
            alpha,
            n,
            seed,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid("alpha must lie in (0, 1)"));
            }
            let gens: Vec<BregmanGenerator> = list(&generators)?;
            for g in &gens {
                for report in standard_suite(g, alpha, n, seed) {
                    out!("{}", serde_json::to_string(&report)?);
                }
            }
        }
        Command::Assumptions {
            distributions,
            generators,
            depth,
            json,
        } => {
            let dists: Vec<AnalyticDistribution> = list(&distributions)?;
            let scales: Vec<Option<BregmanGenerator>> = generators
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| match s {
                    "identity" => Ok(None),
                    other => other.parse().map(Some).map_err(invalid),
                })
                .collect::<Result<_>>()?;
            let mut reports = Vec::new();
            for d in &dists {
                for g in &scales {
                    reports.push(check_assumptions_at(d, g.as_ref(), &Hypothesis::ALL, depth));
                }
            }
            if json {
                print_json(&reports)?;
            } else {
                out!(
                    "{:<16} {:<12} {:>9} {:>9}  {:<13} {:<13} {:<13} {:<13}",
                    "distribution", "scale", "exp_l", "exp_L", "H1", "H2", "H3", "H4"
                );
                for r in &reports {
                    let v = |h| r.verdict(h).map_or("-".to_string(), |v| v.to_string());
                    let e = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
                    out!(
                        "{:<16} {:<12} {:>9} {:>9}  {:<13} {:<13} {:<13} {:<13}",
                        r.distribution,
                        r.generator,
                        e(r.fitted_exponent_l),
                        e(r.fitted_exponent_big_l),
                        v(Hypothesis::H1),
                        v(Hypothesis::H2),
                        v(Hypothesis::H3),
                        v(Hypothesis::H4),
                    );
                    for note in &r.notes {
                        out!("    note: {note}");
                    }
                }
            }
        }
        Command::Report {
            csv,
            alphas,
            generators,
            level,
            json,
        } => {
            if !(0.0..1.0).contains(&level) {
                return Err(invalid("level must lie in [0, 1)"));
            }
            let report = report_risks(&csv, &list(&alphas)?, &list(&generators)?, level)?;
            for w in &report.warnings {
                eprintln!("warning: line {}: {:?}: {}", w.line, w.content, w.reason);
            }
            if json {
                print_json(&report)?;
            } else {
                out!("{}  n={}  level={}", report.source, report.n, report.level);
                out!("{:>6} {:<14} {:>14} {:>14} {:>14}  note", "alpha", "measure", "estimate", "ci_low", "ci_high");
                for r in &report.rows {
                    out!(
                        "{:>6} {:<14} {:>14} {:>14} {:>14}  {}",
                        r.alpha,
                        r.measure,
                        cell(r.point),
                        cell(r.ci_low),
                        cell(r.ci_high),
                        r.note.as_deref().unwrap_or("")
                    );
                }
            }
        }
        Command::Oracle { family, measure, alpha } => {
            let d: AnalyticDistribution = family.parse().map_err(invalid)?;
            let m: RiskMeasure = measure.parse().map_err(invalid)?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid("alpha must lie in (0, 1)"));
            }
            let entry = oracle_entry(&d, &m, alpha);
            print_json(&serde_json::json!({
                "distribution": d.to_string(),
                "measure": m.to_string(),
                "alpha": alpha,
                "value": entry.value,
                "variance": entry.variance,
                "variance_note": entry.variance_note,
            }))?;
        }
        Command::Sample { family, n, seed, output } => {
            let d: AnalyticDistribution = family.parse().map_err(invalid)?;
            let mut text = String::from("x\n");
            for x in d.sample(n, seed) {
                text.push_str(&x.to_string());
                text.push('\n');
            }
            match output {
                Some(path) => std::fs::write(&path, text)?,
                None => {
                    if let Err(e) = std::io::stdout().lock().write_all(text.as_bytes()) {
                        stdout_failed(e)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(t) => t,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")))?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|_| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bregman: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
