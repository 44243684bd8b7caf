//! Tail-growth conditions on `γ′∘F⁻¹` near `t = 1`.
//!
//! With `x = F⁻¹(t)`:
//!
//! ```text
//! l_γ(t) = γ″(x) / f(x)                          first derivative of γ′∘F⁻¹
//! L_γ(t) = (γ‴(x) f(x) − f′(x) γ″(x)) / f(x)³    second derivative
//! ```
//!
//! H1 and H2 ask for `l_γ = O((1−t)^{−2+ε})` and `L_γ = O((1−t)^{−5/2+ε})`;
//! H3 and H4 are the same conditions on the identity scale (`γ″ = 1`).
//! The exponents are estimated by a log-log fit on `1 − t = 2^{−k}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::AnalyticDistribution;
use crate::error::{check_probability, Result, RiskError};
use crate::generators::BregmanGenerator;
use crate::numeric::linear_fit;

/// Default deepest dyadic level `k` of the fitting grid.
pub const DEFAULT_GRID_DEPTH: u32 = 40;
/// Number of deepest grid points entering the fit.
pub const FIT_POINTS: usize = 12;
/// Shallowest grid level.
pub const FIRST_LEVEL: u32 = 4;
/// RMS residual (natural-log units) beyond which the fit is not trusted.
pub const MAX_FIT_RESIDUAL: f64 = 0.1;
/// Half-width of the band around a threshold that is reported inconclusive.
pub const VERDICT_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H4,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 4] = [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3, Hypothesis::H4];

    /// Critical growth exponent `p` in `O((1−t)^{−p+ε})`.
    pub fn threshold(self) -> f64 {
        match self {
            Hypothesis::H1 | Hypothesis::H3 => 2.0,
            Hypothesis::H2 | Hypothesis::H4 => 2.5,
        }
    }

    /// H1/H2 concern the generator scale, H3/H4 the identity scale.
    pub fn on_identity_scale(self) -> bool {
        matches!(self, Hypothesis::H3 | Hypothesis::H4)
    }

    /// Whether the condition bears on the second derivative.
    pub fn second_order(self) -> bool {
        matches!(self, Hypothesis::H2 | Hypothesis::H4)
    }

    /// The first-order condition implied by this one, if any.
    pub fn implies(self) -> Option<Hypothesis> {
        match self {
            Hypothesis::H2 => Some(Hypothesis::H1),
            Hypothesis::H4 => Some(Hypothesis::H3),
            _ => None,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Hypothesis {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H1" => Ok(Hypothesis::H1),
            "H2" => Ok(Hypothesis::H2),
            "H3" => Ok(Hypothesis::H3),
            "H4" => Ok(Hypothesis::H4),
            _ => Err(RiskError::Parse {
                what: "hypothesis",
                input: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HVerdict {
    Satisfied,
    Violated,
    Inconclusive,
    Inapplicable,
}

impl fmt::Display for HVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HVerdict::Satisfied => "satisfied",
            HVerdict::Violated => "violated",
            HVerdict::Inconclusive => "inconclusive",
            HVerdict::Inapplicable => "inapplicable",
        })
    }
}

/// Least-squares growth exponent and fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub exponent: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub distribution: String,
    /// Generator name, or `identity` for the identity scale.
    pub generator: String,
    pub fitted_exponent_l: Option<f64>,
    pub fitted_exponent_big_l: Option<f64>,
    pub residual_l: Option<f64>,
    pub residual_big_l: Option<f64>,
    pub verdicts: BTreeMap<Hypothesis, HVerdict>,
    /// Tail masses `1 − t` entering the fits.
    pub grid: Vec<f64>,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    pub fn verdict(&self, h: Hypothesis) -> Option<HVerdict> {
        self.verdicts.get(&h).copied()
    }
}

/// `x = F⁻¹(1 − v)` and `f(x)`, rejecting a vanishing density.
fn point(d: &AnalyticDistribution, v: f64) -> Result<(f64, f64)> {
    let x = d.quantile_upper(v);
    let f = d.density_at_upper(v);
    if !(f > 0.0 && f.is_finite()) {
        return Err(RiskError::SingularDensity { t: 1.0 - v });
    }
    Ok((x, f))
}

/// `l_γ` as a function of the tail mass `v = 1 − t`.
pub fn l_gamma_upper(d: &AnalyticDistribution, g: &BregmanGenerator, v: f64) -> Result<f64> {
    let (x, f) = point(d, v)?;
    g.check_domain("quantile", x)?;
    Ok(g.hess(x) / f)
}

/// `L_γ` as a function of the tail mass `v = 1 − t`.
pub fn big_l_gamma_upper(d: &AnalyticDistribution, g: &BregmanGenerator, v: f64) -> Result<f64> {
    let (x, f) = point(d, v)?;
    g.check_domain("quantile", x)?;
    let third = g
        .third(x)
        .ok_or_else(|| RiskError::Capability(format!("generator {} has no third derivative", g.name())))?;
    let df = d
        .pdf_deriv(x)
        .ok_or_else(|| RiskError::Capability(format!("distribution {d} has no density derivative")))?;
    Ok((third * f - df * g.hess(x)) / (f * f * f))
}

/// `γ″(F⁻¹(t)) / f(F⁻¹(t))`; the identity generator gives `l = 1/(f∘F⁻¹)`.
pub fn l_gamma(d: &AnalyticDistribution, g: &BregmanGenerator, t: f64) -> Result<f64> {
    check_probability("t", t)?;
    l_gamma_upper(d, g, 1.0 - t)
}

/// Derivative of [`l_gamma`] in `t`.
pub fn big_l_gamma(d: &AnalyticDistribution, g: &BregmanGenerator, t: f64) -> Result<f64> {
    check_probability("t", t)?;
    big_l_gamma_upper(d, g, 1.0 - t)
}

/// Tail masses `2^{−k}` of the last [`FIT_POINTS`] levels up to `grid_depth`.
pub fn fit_grid(grid_depth: u32) -> Result<Vec<f64>> {
    let first = FIRST_LEVEL + FIT_POINTS as u32 - 1;
    if grid_depth < first || grid_depth > 1000 {
        return Err(RiskError::Capability(format!(
            "grid depth must lie in [{first}, 1000], got {grid_depth}"
        )));
    }
    Ok((grid_depth + 1 - FIT_POINTS as u32..=grid_depth)
        .map(|k| 0.5f64.powi(k as i32))
        .collect())
}

/// Growth exponent `p` of `|h(v)| ~ v^{−p}` as `v = 1 − t → 0`.
///
/// `h` takes the tail mass `v`, so that levels far beyond `f64` resolution
/// of `t` stay representable. An identically zero `h` has exponent `−∞`.
pub fn fit_tail_exponent<H: Fn(f64) -> Result<f64>>(h: H, grid_depth: u32) -> Result<TailFit> {
    let grid = fit_grid(grid_depth)?;
    let values = grid.iter().map(|&v| h(v)).collect::<Result<Vec<f64>>>()?;
    if values.iter().all(|&y| y == 0.0) {
        return Ok(TailFit {
            exponent: f64::NEG_INFINITY,
            residual: 0.0,
        });
    }
    if values.iter().any(|y| !(y.is_finite() && *y != 0.0)) {
        return Err(RiskError::UnstableFit {
            slope: f64::NAN,
            residual: f64::INFINITY,
        });
    }
    let x: Vec<f64> = grid.iter().map(|v| -v.ln()).collect();
    let y: Vec<f64> = values.iter().map(|h| h.abs().ln()).collect();
    let (slope, _, residual) = linear_fit(&x, &y);
    if !slope.is_finite() || residual > MAX_FIT_RESIDUAL {
        return Err(RiskError::UnstableFit { slope, residual });
    }
    Ok(TailFit {
        exponent: slope,
        residual,
    })
}

fn verdict_for(exponent: f64, threshold: f64) -> HVerdict {
    if exponent <= threshold - VERDICT_MARGIN {
        HVerdict::Satisfied
    } else if exponent >= threshold + VERDICT_MARGIN {
        HVerdict::Violated
    } else {
        HVerdict::Inconclusive
    }
}

/// Verdicts for the requested hypotheses.
///
/// With `g = None` the pair is on the identity scale and H3/H4 apply; with a
/// generator, H1/H2 apply. The other pair is reported inapplicable.
pub fn check_assumptions(
    d: &AnalyticDistribution,
    g: Option<&BregmanGenerator>,
    which: &[Hypothesis],
) -> AssumptionReport {
    check_assumptions_at(d, g, which, DEFAULT_GRID_DEPTH)
}

pub fn check_assumptions_at(
    d: &AnalyticDistribution,
    g: Option<&BregmanGenerator>,
    which: &[Hypothesis],
    grid_depth: u32,
) -> AssumptionReport {
    let identity = BregmanGenerator::identity();
    let scale = g.unwrap_or(&identity);
    let identity_scale = g.is_none();
    let mut notes = Vec::new();

    let needs_first = which.iter().any(|h| h.on_identity_scale() == identity_scale);
    let needs_second = which
        .iter()
        .any(|h| h.second_order() && h.on_identity_scale() == identity_scale);

    let mut fit = |label: &str, wanted: bool, h: &dyn Fn(f64) -> Result<f64>| -> Option<TailFit> {
        if !wanted {
            return None;
        }
        match fit_tail_exponent(h, grid_depth) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("{label}: {e}"));
                None
            }
        }
    };
    let fit_l = fit("l", needs_first, &|v| l_gamma_upper(d, scale, v));
    let fit_big_l = fit("L", needs_second, &|v| big_l_gamma_upper(d, scale, v));

    let mut verdicts = BTreeMap::new();
    for &h in which {
        let verdict = if h.on_identity_scale() != identity_scale {
            HVerdict::Inapplicable
        } else {
            let fitted = if h.second_order() { fit_big_l } else { fit_l };
            match fitted {
                Some(f) => verdict_for(f.exponent, h.threshold()),
                None => HVerdict::Inapplicable,
            }
        };
        verdicts.insert(h, verdict);
    }

    // A second-order condition implies its first-order one; a fit that
    // disagrees is not trusted.
    for h in [Hypothesis::H2, Hypothesis::H4] {
        let Some(lower) = h.implies() else { continue };
        if verdicts.get(&h) == Some(&HVerdict::Satisfied) {
            let first = match verdicts.get(&lower) {
                Some(v) => *v,
                None => fit_l.map_or(HVerdict::Inapplicable, |f| verdict_for(f.exponent, lower.threshold())),
            };
            if first != HVerdict::Satisfied {
                verdicts.insert(h, HVerdict::Inconclusive);
                notes.push(format!("{h} fit satisfied but {lower} is {first}; {h} downgraded"));
            }
        }
    }

    AssumptionReport {
        distribution: d.to_string(),
        generator: g.map_or_else(|| "identity".to_string(), |g| g.name().to_string()),
        fitted_exponent_l: fit_l.map(|f| f.exponent),
        fitted_exponent_big_l: fit_big_l.map(|f| f.exponent),
        residual_l: fit_l.map(|f| f.residual),
        residual_big_l: fit_big_l.map(|f| f.residual),
        verdicts,
        grid: fit_grid(grid_depth).unwrap_or_default(),
        notes,
    }
}

/// Whether the asymptotic normality conditions for `g` (or the identity
/// scale) are violated outright.
pub fn normality_violated(d: &AnalyticDistribution, g: Option<&BregmanGenerator>) -> bool {
    let which = if g.is_some() {
        [Hypothesis::H1, Hypothesis::H2]
    } else {
        [Hypothesis::H3, Hypothesis::H4]
    };
    let report = check_assumptions(d, g, &which);
    report.verdicts.values().any(|v| *v == HVerdict::Violated)
}
