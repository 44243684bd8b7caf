//! Executable checks of the coherence axioms.
//!
//! Oracle-mode checks use quadrature on closed-form laws and are
//! deterministic. Monte Carlo checks are deterministic given their seed.
//! A `fails` verdict always carries a [`Witness`] that can be replayed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{seeded_rng, AnalyticDistribution};
use crate::error::{Result, RiskError};
use crate::estimators::{
    bregman_superquantile_hat, clt_interval, empirical_quantile, EmpiricalSample, VarianceSource,
};
use crate::generators::{BregmanGenerator, GeneratorFamily};
use crate::numeric::linear_fit;
use crate::oracle::Oracle;

/// Tolerance for constant invariance, relative to `max(1, |c|)`.
pub const CONSTANT_TOL: f64 = 1e-12;
/// Largest relative gap accepted as homogeneous.
pub const HOMOGENEITY_TOL: f64 = 1e-8;
/// Slack for oracle comparisons (monotonicity, comonotone subadditivity).
pub const ORACLE_SLACK: f64 = 1e-10;
/// Number of combined standard errors allowed in Monte Carlo subadditivity.
pub const MC_SIGMAS: f64 = 3.0;
/// Closeness gaps at or below this are treated as vanished.
pub const CLOSENESS_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    ConstantInvariance,
    Homogeneity,
    Subadditivity,
    Monotonicity,
    Closeness,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::ConstantInvariance => "constant_invariance",
            Axiom::Homogeneity => "homogeneity",
            Axiom::Subadditivity => "subadditivity",
            Axiom::Monotonicity => "monotonicity",
            Axiom::Closeness => "closeness",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Oracle,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// How the second variable of a pair is built from the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairScenario {
    /// `X′ = X`.
    Comonotone { base: AnalyticDistribution },
    /// `X′ = factor·X`, `factor > 0`.
    ScaledCopy { base: AnalyticDistribution, factor: f64 },
    /// `X′` independent of `X`.
    Independent {
        base: AnalyticDistribution,
        other: AnalyticDistribution,
    },
    /// `X′ = −X`.
    Negated { base: AnalyticDistribution },
}

impl PairScenario {
    /// The factor `c` with `X′ = cX` when the pair is comonotone.
    fn copy_factor(&self) -> Option<(AnalyticDistribution, f64)> {
        match *self {
            PairScenario::Comonotone { base } => Some((base, 1.0)),
            PairScenario::ScaledCopy { base, factor } if factor > 0.0 => Some((base, factor)),
            _ => None,
        }
    }

    /// `(X, X′, X + X′)` with `n` rows.
    pub fn sample(&self, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = seeded_rng(seed);
        let (x, y) = match *self {
            PairScenario::Comonotone { base } => {
                let x = base.sample_with(&mut rng, n);
                (x.clone(), x)
            }
            PairScenario::ScaledCopy { base, factor } => {
                let x = base.sample_with(&mut rng, n);
                let y = x.iter().map(|v| factor * v).collect();
                (x, y)
            }
            PairScenario::Independent { base, other } => {
                let x = base.sample_with(&mut rng, n);
                let y = other.sample_with(&mut rng, n);
                (x, y)
            }
            PairScenario::Negated { base } => {
                let x = base.sample_with(&mut rng, n);
                let y = x.iter().map(|v| -v).collect();
                (x, y)
            }
        };
        let z = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        (x, y, z)
    }
}

impl fmt::Display for PairScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairScenario::Comonotone { base } => write!(f, "X'=X, X~{base}"),
            PairScenario::ScaledCopy { base, factor } => write!(f, "X'={factor}X, X~{base}"),
            PairScenario::Independent { base, other } => write!(f, "X~{base} indep X'~{other}"),
            PairScenario::Negated { base } => write!(f, "X'=-X, X~{base}"),
        }
    }
}

/// A family `X_h` with `‖X_h − X‖₂ → 0` as `h → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `X + h`.
    Shift { base: AnalyticDistribution },
    /// `X·(1 + h)`.
    Scale { base: AnalyticDistribution },
    /// `X + h·a·U`, `U` uniform on `[−1, 1]` and independent of `X`.
    Noise {
        base: AnalyticDistribution,
        amplitude: f64,
        n: usize,
        seed: u64,
    },
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Shift { base } => write!(f, "X+h, X~{base}"),
            Perturbation::Scale { base } => write!(f, "X(1+h), X~{base}"),
            Perturbation::Noise { base, amplitude, .. } => write!(f, "X+h*{amplitude}*U[-1,1], X~{base}"),
        }
    }
}

/// Inputs and margin behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Constant {
        c: f64,
        alpha: f64,
        n: usize,
        value: f64,
        gap: f64,
        tolerance: f64,
    },
    Homogeneity {
        distribution: AnalyticDistribution,
        alpha: f64,
        lambda: f64,
        scaled_risk: f64,
        expected: f64,
        ratio: f64,
        relative_gap: f64,
        tolerance: f64,
    },
    Subadditivity {
        scenario: PairScenario,
        alpha: f64,
        n: Option<usize>,
        seed: Option<u64>,
        risk_sum: f64,
        risk_x: f64,
        risk_x_prime: f64,
        gap: f64,
        margin: f64,
    },
    Monotonicity {
        low: AnalyticDistribution,
        high: AnalyticDistribution,
        alpha: f64,
        low_risk: f64,
        high_risk: f64,
        gap: f64,
        tolerance: f64,
    },
    Closeness {
        perturbation: Perturbation,
        alpha: f64,
        hs: Vec<f64>,
        gaps: Vec<f64>,
        decay: Option<f64>,
    },
}

impl Witness {
    /// Re-evaluates the inputs; true when they still show a violation
    /// beyond the recorded tolerance.
    pub fn replay(&self, g: &BregmanGenerator) -> Result<bool> {
        let oracle = Oracle::default();
        match self {
            Witness::Constant { c, alpha, n, tolerance, .. } => {
                let s = EmpiricalSample::new(vec![*c; *n])?;
                let value = bregman_superquantile_hat(&s, g, *alpha)?.point;
                Ok((value - c).abs() > *tolerance)
            }
            Witness::Homogeneity {
                distribution,
                alpha,
                lambda,
                tolerance,
                ..
            } => {
                let base = oracle.bregman_superquantile(distribution, g, *alpha)?;
                let scaled = oracle.bregman_superquantile(&distribution.scaled(*lambda), g, *alpha)?;
                Ok(relative_gap(scaled, lambda * base) > *tolerance)
            }
            Witness::Subadditivity {
                scenario,
                alpha,
                n,
                seed,
                margin,
                ..
            } => {
                let risks = match (n, seed) {
                    (Some(n), Some(seed)) => monte_carlo_pair(g, scenario, *alpha, *n, *seed)?.0,
                    _ => {
                        let (base, factor) = scenario
                            .copy_factor()
                            .ok_or_else(|| RiskError::Capability("oracle mode needs a comonotone pair".into()))?;
                        oracle_pair(&oracle, g, &base, factor, *alpha)?
                    }
                };
                Ok(risks.0 - risks.1 - risks.2 > *margin)
            }
            Witness::Monotonicity {
                low,
                high,
                alpha,
                tolerance,
                ..
            } => {
                let lo = oracle.bregman_superquantile(low, g, *alpha)?;
                let hi = oracle.bregman_superquantile(high, g, *alpha)?;
                Ok(lo > hi + tolerance)
            }
            Witness::Closeness { perturbation, alpha, hs, .. } => {
                let gaps = closeness_gaps(&oracle, g, perturbation, *alpha, hs)?;
                let (verdict, _, _) = closeness_verdict(hs, &gaps);
                Ok(verdict == Verdict::Fails)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub mode: Mode,
    pub verdict: Verdict,
    pub generator: String,
    pub scenario: String,
    pub witness: Option<Witness>,
    pub reason: Option<String>,
}

impl AxiomReport {
    fn new(axiom: Axiom, mode: Mode, g: &BregmanGenerator, scenario: String) -> Self {
        Self {
            axiom,
            mode,
            verdict: Verdict::Inconclusive,
            generator: g.name().to_string(),
            scenario,
            witness: None,
            reason: None,
        }
    }

    fn inconclusive(mut self, reason: impl Into<String>) -> Self {
        self.verdict = Verdict::Inconclusive;
        self.reason = Some(reason.into());
        self
    }

    fn decided(mut self, verdict: Verdict, witness: Witness) -> Self {
        self.verdict = verdict;
        self.witness = Some(witness);
        self
    }
}

fn relative_gap(value: f64, expected: f64) -> f64 {
    (value - expected).abs() / expected.abs().max(f64::MIN_POSITIVE)
}

/// Smallest `n ≥ 1000` with `nα` an integer, so the estimator's
/// normalization equals its tail count; 1000 when no such `n` is small.
pub fn constant_sample_size(alpha: f64) -> usize {
    (1000..=1_000_000)
        .find(|&n| {
            let x = n as f64 * alpha;
            (x - x.round()).abs() <= 1e-9 * x
        })
        .unwrap_or(1000)
}

/// The estimator on a constant sample returns the constant.
pub fn check_constant_invariance(g: &BregmanGenerator, c: f64, alpha: f64) -> AxiomReport {
    let report = AxiomReport::new(Axiom::ConstantInvariance, Mode::MonteCarlo, g, format!("X = {c}"));
    if let Err(e) = g.check_domain("c", c) {
        return report.inconclusive(e.to_string());
    }
    let n = constant_sample_size(alpha);
    let value = match EmpiricalSample::new(vec![c; n]).and_then(|s| bregman_superquantile_hat(&s, g, alpha)) {
        Ok(e) => e.point,
        Err(e) => return report.inconclusive(e.to_string()),
    };
    let tolerance = CONSTANT_TOL * c.abs().max(1.0);
    let gap = (value - c).abs();
    let verdict = if gap <= tolerance { Verdict::Holds } else { Verdict::Fails };
    report.decided(
        verdict,
        Witness::Constant {
            c,
            alpha,
            n,
            value,
            gap,
            tolerance,
        },
    )
}

/// Oracle comparison of `R(λX)` with `λR(X)`; reports the worst `λ`.
pub fn check_homogeneity(
    g: &BregmanGenerator,
    d: &AnalyticDistribution,
    alpha: f64,
    lambdas: &[f64],
) -> AxiomReport {
    let report = AxiomReport::new(Axiom::Homogeneity, Mode::Oracle, g, format!("X~{d}"));
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return report.inconclusive("scale factors must be positive and finite");
    }
    let oracle = Oracle::default();
    let base = match oracle.bregman_superquantile(d, g, alpha) {
        Ok(v) if v.is_finite() => v,
        Ok(v) => return report.inconclusive(format!("R(X) = {v}")),
        Err(e) => return report.inconclusive(e.to_string()),
    };
    let mut worst: Option<Witness> = None;
    let mut worst_gap = -1.0;
    for &lambda in lambdas {
        let scaled = match oracle.bregman_superquantile(&d.scaled(lambda), g, alpha) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => return report.inconclusive(format!("R({lambda}X) = {v}")),
            Err(e) => return report.inconclusive(e.to_string()),
        };
        let expected = lambda * base;
        let gap = relative_gap(scaled, expected);
        if gap > worst_gap {
            worst_gap = gap;
            worst = Some(Witness::Homogeneity {
                distribution: *d,
                alpha,
                lambda,
                scaled_risk: scaled,
                expected,
                ratio: scaled / expected,
                relative_gap: gap,
                tolerance: HOMOGENEITY_TOL,
            });
        }
    }
    let verdict = if worst_gap <= HOMOGENEITY_TOL { Verdict::Holds } else { Verdict::Fails };
    report.decided(verdict, worst.expect("at least one scale factor"))
}

/// Generators whose subadditivity claim is restricted to pairs with all
/// three `α`-quantiles above 1.
fn needs_quantiles_above_one(g: &BregmanGenerator) -> bool {
    matches!(g.family(), Some(GeneratorFamily::Geometric | GeneratorFamily::Harmonic))
}

fn quantile_precondition(g: &BregmanGenerator, quantiles: [f64; 3]) -> std::result::Result<(), String> {
    if needs_quantiles_above_one(g) {
        let min = quantiles.iter().copied().fold(f64::INFINITY, f64::min);
        if min.is_nan() || min <= 1.0 {
            return Err(format!(
                "precondition min(q_X, q_X', q_X+X') > 1 fails: quantiles {quantiles:?}"
            ));
        }
    }
    Ok(())
}

/// `(R(X + X′), R(X), R(X′))` for `X′ = cX` by quadrature.
fn oracle_pair(
    oracle: &Oracle,
    g: &BregmanGenerator,
    base: &AnalyticDistribution,
    factor: f64,
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    let sum = oracle.bregman_superquantile(&base.scaled(1.0 + factor), g, alpha)?;
    let x = oracle.bregman_superquantile(base, g, alpha)?;
    let y = oracle.bregman_superquantile(&base.scaled(factor), g, alpha)?;
    Ok((sum, x, y))
}

/// `(R(X + X′), R(X), R(X′))`, their margin, and the empirical quantiles.
type PairEstimate = ((f64, f64, f64), f64, [f64; 3]);

fn monte_carlo_pair(
    g: &BregmanGenerator,
    scenario: &PairScenario,
    alpha: f64,
    n: usize,
    seed: u64,
) -> Result<PairEstimate> {
    let (x, y, z) = scenario.sample(n, seed);
    let mut points = [0.0; 3];
    let mut quantiles = [0.0; 3];
    let mut margin = 0.0;
    for (i, values) in [z, x, y].into_iter().enumerate() {
        let s = EmpiricalSample::new(values)?;
        quantiles[i] = empirical_quantile(&s, alpha)?;
        let est = bregman_superquantile_hat(&s, g, alpha)?;
        let ci = clt_interval(&est, VarianceSource::Empirical(&s), g, 0.0)?;
        let variance = ci.clt_variance.expect("filled by clt_interval");
        margin += MC_SIGMAS * (variance / n as f64).sqrt();
        points[i] = est.point;
    }
    Ok(((points[0], points[1], points[2]), margin, quantiles))
}

/// `R(X + X′) ≤ R(X) + R(X′)`.
///
/// Comonotone pairs (`X′ = cX`, `c > 0`) are checked exactly by quadrature;
/// other pairs by Monte Carlo with a margin of three combined standard errors.
pub fn check_subadditivity(
    g: &BregmanGenerator,
    scenario: &PairScenario,
    alpha: f64,
    n: usize,
    seed: u64,
) -> AxiomReport {
    if let Some((base, factor)) = scenario.copy_factor() {
        let report = AxiomReport::new(Axiom::Subadditivity, Mode::Oracle, g, scenario.to_string());
        let q = base.quantile(alpha);
        for (name, d) in [("X", base), ("X'", base.scaled(factor)), ("X+X'", base.scaled(1.0 + factor))] {
            if let Err(e) = crate::oracle::check_tail_in_domain(&d, g, alpha) {
                return report.inconclusive(format!("{name}: {e}"));
            }
        }
        if let Err(reason) = quantile_precondition(g, [q, factor * q, (1.0 + factor) * q]) {
            return report.inconclusive(reason);
        }
        let oracle = Oracle::default();
        let (sum, x, y) = match oracle_pair(&oracle, g, &base, factor, alpha) {
            Ok(r) if r.0.is_finite() && r.1.is_finite() && r.2.is_finite() => r,
            Ok(r) => return report.inconclusive(format!("non-finite oracle values {r:?}")),
            Err(e) => return report.inconclusive(e.to_string()),
        };
        let gap = sum - x - y;
        let margin = ORACLE_SLACK * sum.abs().max(1.0);
        let verdict = if gap <= margin { Verdict::Holds } else { Verdict::Fails };
        return report.decided(
            verdict,
            Witness::Subadditivity {
                scenario: *scenario,
                alpha,
                n: None,
                seed: None,
                risk_sum: sum,
                risk_x: x,
                risk_x_prime: y,
                gap,
                margin,
            },
        );
    }

    let report = AxiomReport::new(Axiom::Subadditivity, Mode::MonteCarlo, g, scenario.to_string());
    let ((sum, x, y), margin, quantiles) = match monte_carlo_pair(g, scenario, alpha, n, seed) {
        Ok(r) => r,
        Err(e) => return report.inconclusive(e.to_string()),
    };
    if let Err(reason) = quantile_precondition(g, quantiles) {
        return report.inconclusive(reason);
    }
    let gap = sum - x - y;
    let verdict = if gap <= margin { Verdict::Holds } else { Verdict::Fails };
    report.decided(
        verdict,
        Witness::Subadditivity {
            scenario: *scenario,
            alpha,
            n: Some(n),
            seed: Some(seed),
            risk_sum: sum,
            risk_x: x,
            risk_x_prime: y,
            gap,
            margin,
        },
    )
}

/// Probability levels on which quantile dominance is verified.
fn dominance_grid() -> impl Iterator<Item = f64> {
    (1..1000)
        .map(|i| i as f64 / 1000.0)
        .chain((10..=50).map(|k| 1.0 - 0.5f64.powi(k)))
}

/// `F⁻¹_low ≤ F⁻¹_high` pointwise implies `R(low) ≤ R(high)`.
pub fn check_monotonicity(
    g: &BregmanGenerator,
    d_low: &AnalyticDistribution,
    d_high: &AnalyticDistribution,
    alpha: f64,
) -> AxiomReport {
    let report = AxiomReport::new(Axiom::Monotonicity, Mode::Oracle, g, format!("{d_low} <= {d_high}"));
    if let Some(t) = dominance_grid().find(|&t| d_low.quantile(t) > d_high.quantile(t)) {
        return report.inconclusive(format!("quantiles are not ordered at t = {t}"));
    }
    let oracle = Oracle::default();
    let (lo, hi) = match (
        oracle.bregman_superquantile(d_low, g, alpha),
        oracle.bregman_superquantile(d_high, g, alpha),
    ) {
        (Ok(lo), Ok(hi)) if !lo.is_nan() && !hi.is_nan() => (lo, hi),
        (Err(e), _) | (_, Err(e)) => return report.inconclusive(e.to_string()),
        _ => return report.inconclusive("oracle returned NaN"),
    };
    let tolerance = ORACLE_SLACK * hi.abs().max(1.0);
    let holds = lo <= hi || (lo - hi) <= tolerance;
    report.decided(
        if holds { Verdict::Holds } else { Verdict::Fails },
        Witness::Monotonicity {
            low: *d_low,
            high: *d_high,
            alpha,
            low_risk: lo,
            high_risk: hi,
            gap: hi - lo,
            tolerance,
        },
    )
}

/// `h = 1, 1/2, …, 1/64`.
pub fn closeness_steps() -> Vec<f64> {
    (0..=6).map(|k| 0.5f64.powi(k)).collect()
}

fn closeness_gaps(
    oracle: &Oracle,
    g: &BregmanGenerator,
    perturbation: &Perturbation,
    alpha: f64,
    hs: &[f64],
) -> Result<Vec<f64>> {
    match *perturbation {
        Perturbation::Shift { base } => {
            let r = oracle.bregman_superquantile(&base, g, alpha)?;
            hs.iter()
                .map(|&h| Ok((oracle.bregman_superquantile(&base.shifted(h), g, alpha)? - r).abs()))
                .collect()
        }
        Perturbation::Scale { base } => {
            let r = oracle.bregman_superquantile(&base, g, alpha)?;
            hs.iter()
                .map(|&h| Ok((oracle.bregman_superquantile(&base.scaled(1.0 + h), g, alpha)? - r).abs()))
                .collect()
        }
        Perturbation::Noise {
            base,
            amplitude,
            n,
            seed,
        } => {
            // common random numbers across h
            let mut rng = seeded_rng(seed);
            let x = base.sample_with(&mut rng, n);
            let u: Vec<f64> = AnalyticDistribution::uniform()
                .sample_with(&mut rng, n)
                .into_iter()
                .map(|v| 2.0 * v - 1.0)
                .collect();
            let r = bregman_superquantile_hat(&EmpiricalSample::new(x.clone())?, g, alpha)?.point;
            hs.iter()
                .map(|&h| {
                    let xh = x.iter().zip(&u).map(|(a, b)| a + h * amplitude * b).collect();
                    let rh = bregman_superquantile_hat(&EmpiricalSample::new(xh)?, g, alpha)?.point;
                    Ok((rh - r).abs())
                })
                .collect()
        }
    }
}

/// Verdict on a gap sequence ordered by decreasing `h`, with the fitted
/// decay exponent of `gap ~ h^p` over the last four steps.
fn closeness_verdict(hs: &[f64], gaps: &[f64]) -> (Verdict, Option<f64>, Option<String>) {
    if gaps.iter().any(|g| !g.is_finite()) {
        return (Verdict::Inconclusive, None, Some("non-finite gap".into()));
    }
    let scale = gaps.iter().copied().fold(0.0, f64::max);
    if scale <= 1e-12 {
        return (Verdict::Holds, None, None);
    }
    let tail = gaps.len().saturating_sub(4);
    let last = gaps[gaps.len() - 1];
    let monotone = gaps[tail..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let decay = if gaps[tail..].iter().all(|&g| g > 0.0) {
        let lx: Vec<f64> = hs[tail..].iter().map(|h| h.ln()).collect();
        let ly: Vec<f64> = gaps[tail..].iter().map(|g| g.ln()).collect();
        Some(linear_fit(&lx, &ly).0)
    } else {
        None
    };
    let vanishing = last <= CLOSENESS_FLOOR || decay.is_some_and(|p| p > 0.25);
    match (monotone, vanishing) {
        (true, true) => (Verdict::Holds, decay, None),
        (false, true) => (Verdict::Inconclusive, decay, Some("gaps are small but not monotone".into())),
        (_, false) => (Verdict::Fails, decay, Some("gaps do not decay with h".into())),
    }
}

/// `R(X_h) → R(X)` along `h = 2^{-k}`, `k = 0..6`.
pub fn check_closeness(g: &BregmanGenerator, perturbation: &Perturbation, alpha: f64) -> AxiomReport {
    let mode = match perturbation {
        Perturbation::Noise { .. } => Mode::MonteCarlo,
        _ => Mode::Oracle,
    };
    let report = AxiomReport::new(Axiom::Closeness, mode, g, perturbation.to_string());
    let hs = closeness_steps();
    let gaps = match closeness_gaps(&Oracle::default(), g, perturbation, alpha, &hs) {
        Ok(gaps) => gaps,
        Err(e) => return report.inconclusive(e.to_string()),
    };
    let (verdict, decay, reason) = closeness_verdict(&hs, &gaps);
    let mut report = report.decided(
        verdict,
        Witness::Closeness {
            perturbation: *perturbation,
            alpha,
            hs,
            gaps,
            decay,
        },
    );
    report.reason = reason;
    report
}

/// A distribution whose `α`-tail is inside the generator's domain, has
/// quantiles above 1, and keeps every oracle finite.
pub fn suite_distribution(g: &BregmanGenerator) -> AnalyticDistribution {
    match g.family() {
        Some(GeneratorFamily::Exp) => AnalyticDistribution::uniform(),
        _ => AnalyticDistribution::exponential().shifted(1.0),
    }
}

/// One report per axiom on the default scenarios for `g`.
pub fn standard_suite(g: &BregmanGenerator, alpha: f64, n: usize, seed: u64) -> Vec<AxiomReport> {
    let d = suite_distribution(g);
    vec![
        check_constant_invariance(g, 7.0, alpha),
        check_homogeneity(g, &d, alpha, &[0.5, 2.0, 4.0, 10.0]),
        check_subadditivity(g, &PairScenario::Comonotone { base: d }, alpha, n, seed),
        check_subadditivity(g, &PairScenario::Independent { base: d, other: d }, alpha, n, seed),
        check_monotonicity(g, &d, &d.scaled(2.0), alpha),
        check_closeness(g, &Perturbation::Shift { base: d }, alpha),
        check_closeness(g, &Perturbation::Scale { base: d }, alpha),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn replayed(report: &AxiomReport, g: &BregmanGenerator) -> bool {
        report.witness.as_ref().expect("witness").replay(g).unwrap()
    }

    #[test]
    fn constant_invariance_examples() {
        let geo = BregmanGenerator::geometric();
        assert_eq!(check_constant_invariance(&geo, 7.0, 0.95).verdict, Verdict::Holds);
        assert_eq!(
            check_constant_invariance(&BregmanGenerator::harmonic(), 0.5, 0.95).verdict,
            Verdict::Holds
        );
        let r = check_constant_invariance(&geo, -1.0, 0.95);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.reason.unwrap().contains("outside"));
    }

    #[test]
    fn homogeneity_examples() {
        let r = check_homogeneity(
            &BregmanGenerator::geometric(),
            &AnalyticDistribution::pareto(1.5),
            0.95,
            &[0.5, 2.0, 10.0],
        );
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");

        let low_uniform = AnalyticDistribution::uniform().scaled(0.9).shifted(0.1);
        let r = check_homogeneity(&BregmanGenerator::power(-0.5), &low_uniform, 0.95, &[2.0]);
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");

        let exp = BregmanGenerator::exp();
        let r = check_homogeneity(&exp, &AnalyticDistribution::uniform(), 0.95, &[4.0]);
        assert_eq!(r.verdict, Verdict::Fails);
        match r.witness.as_ref().unwrap() {
            Witness::Homogeneity { ratio, .. } => assert!((ratio - 1.000321).abs() < 1e-5, "{ratio}"),
            w => panic!("{w:?}"),
        }
        assert!(replayed(&r, &exp));
    }

    #[test]
    fn counterexample_ratio_matches_closed_form() {
        // R(λX) = ln((e^λ − e^{αλ})/(λ(1−α))) for X uniform
        let closed = |lambda: f64| ((lambda.exp() - (0.95 * lambda).exp()) / (lambda * 0.05)).ln();
        let r = check_homogeneity(&BregmanGenerator::exp(), &AnalyticDistribution::uniform(), 0.95, &[4.0]);
        let Some(Witness::Homogeneity { scaled_risk, expected, .. }) = r.witness else { panic!() };
        assert_relative_eq!(scaled_risk, closed(4.0), max_relative = 1e-12);
        assert_relative_eq!(expected, 4.0 * closed(1.0), max_relative = 1e-12);
    }

    #[test]
    fn subadditivity_counterexample() {
        let exp = BregmanGenerator::exp();
        let scenario = PairScenario::Comonotone {
            base: AnalyticDistribution::uniform(),
        };
        let r = check_subadditivity(&exp, &scenario, 0.95, 0, 0);
        assert_eq!(r.mode, Mode::Oracle);
        assert_eq!(r.verdict, Verdict::Fails);
        let Some(Witness::Subadditivity { gap, .. }) = r.witness else { panic!() };
        assert!((gap - 2.0834e-4).abs() < 1e-7, "{gap}");
        assert!(replayed(&r, &exp));
    }

    #[test]
    fn euclidean_independent_pair_holds_by_monte_carlo() {
        let g = BregmanGenerator::euclidean();
        let scenario = PairScenario::Independent {
            base: AnalyticDistribution::exponential(),
            other: AnalyticDistribution::pareto(2.5),
        };
        let r = check_subadditivity(&g, &scenario, 0.95, 1_000_000, 42);
        assert_eq!(r.mode, Mode::MonteCarlo);
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        let again = check_subadditivity(&g, &scenario, 0.95, 1_000_000, 42);
        assert_eq!(r, again);
    }

    #[test]
    fn negated_pair_is_rejected_by_domain() {
        let r = check_subadditivity(
            &BregmanGenerator::geometric(),
            &PairScenario::Negated {
                base: AnalyticDistribution::exponential().shifted(1.0),
            },
            0.95,
            10_000,
            1,
        );
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.reason.unwrap().contains("outside"));
    }

    #[test]
    fn geometric_precondition_is_reported() {
        let r = check_subadditivity(
            &BregmanGenerator::geometric(),
            &PairScenario::Comonotone {
                base: AnalyticDistribution::uniform(),
            },
            0.95,
            0,
            0,
        );
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.reason.unwrap().contains("> 1"));
    }

    #[test]
    fn monotonicity_examples() {
        let geo = BregmanGenerator::geometric();
        let light = AnalyticDistribution::pareto(2.5);
        let heavy = AnalyticDistribution::pareto(1.5);
        assert_eq!(check_monotonicity(&geo, &light, &heavy, 0.95).verdict, Verdict::Holds);
        assert_eq!(check_monotonicity(&geo, &heavy, &light, 0.95).verdict, Verdict::Inconclusive);

        let same = check_monotonicity(&geo, &light, &light, 0.95);
        let Some(Witness::Monotonicity { gap, .. }) = same.witness else { panic!() };
        assert_eq!(gap, 0.0);

        let exp = AnalyticDistribution::exponential();
        let r = check_monotonicity(&BregmanGenerator::euclidean(), &exp, &exp.shifted(1.0), 0.95);
        let Some(Witness::Monotonicity { gap, .. }) = r.witness else { panic!() };
        assert!((gap - 1.0).abs() < 1e-9, "{gap}");
    }

    #[test]
    fn closeness_examples() {
        let exp = AnalyticDistribution::exponential();
        let r = check_closeness(&BregmanGenerator::euclidean(), &Perturbation::Shift { base: exp }, 0.95);
        assert_eq!(r.verdict, Verdict::Holds);
        let Some(Witness::Closeness { hs, gaps, .. }) = &r.witness else { panic!() };
        for (h, gap) in hs.iter().zip(gaps) {
            assert!((gap - h).abs() < 1e-9, "{h} {gap}");
        }

        let pareto = AnalyticDistribution::pareto(1.5);
        let geo = BregmanGenerator::geometric();
        let r = check_closeness(&geo, &Perturbation::Scale { base: pareto }, 0.95);
        assert_eq!(r.verdict, Verdict::Holds);
        let q = Oracle::default().bregman_superquantile(&pareto, &geo, 0.95).unwrap();
        let Some(Witness::Closeness { hs, gaps, .. }) = &r.witness else { panic!() };
        for (h, gap) in hs.iter().zip(gaps) {
            assert_relative_eq!(*gap, h * q, max_relative = 1e-8);
        }

        let noise = Perturbation::Noise {
            base: exp.shifted(1.0),
            amplitude: 0.5,
            n: 100_000,
            seed: 9,
        };
        let r = check_closeness(&BregmanGenerator::harmonic(), &noise, 0.95);
        assert_eq!(r.mode, Mode::MonteCarlo);
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    }

    #[test]
    fn closeness_fails_when_gaps_do_not_shrink() {
        let hs = closeness_steps();
        let gaps = vec![1.0; hs.len()];
        assert_eq!(closeness_verdict(&hs, &gaps).0, Verdict::Fails);
    }

    #[test]
    fn euclidean_is_coherent() {
        let g = BregmanGenerator::euclidean();
        for r in standard_suite(&g, 0.95, 200_000, 3) {
            assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        }
    }

    #[test]
    fn exp_generator_fails_witnesses_replay() {
        let g = BregmanGenerator::exp();
        let reports = standard_suite(&g, 0.95, 100_000, 3);
        let fails: Vec<_> = reports.iter().filter(|r| r.verdict == Verdict::Fails).collect();
        assert!(fails.iter().any(|r| r.axiom == Axiom::Homogeneity));
        assert!(fails.iter().any(|r| r.axiom == Axiom::Subadditivity));
        for r in fails {
            assert!(replayed(r, &g), "{r:?}");
        }
    }
}
