//! Closed-form test distributions and pushforward quantities for `Z = γ′(X)`.
//!
//! Every family exposes `F`, `F⁻¹`, `f` and `f′` exactly. Families can be
//! shifted and rescaled (`X ↦ loc + scale·X`), which is how the coherence
//! checks build `λX` and `X + c` without leaving closed form.
//!
//! Sampling is inverse-CDF driven by `ChaCha8Rng` (rand_chacha 0.9) seeded
//! with `seed_from_u64`. Uniform draws come from the open interval `(0, 1)`;
//! a draw `v` is mapped through the upper-tail quantile `F⁻¹(1 − v)`, which
//! keeps full relative precision deep in heavy tails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Interval, Result, RiskError};
use crate::generators::BregmanGenerator;

/// The PRNG behind every seeded sample in this crate.
pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DistributionFamily {
    /// Rate 1.
    Exponential,
    /// Shape `a > 0`, scale 1: `F(x) = 1 − x^{−a}` on `[1, ∞)`.
    Pareto { a: f64 },
    /// On `[0, 1]`.
    Uniform,
    /// Density `2/(π(1 + x²))` on `[0, ∞)`; no finite mean.
    OneSidedCauchy,
}

impl DistributionFamily {
    fn support(&self) -> Interval {
        match self {
            DistributionFamily::Exponential | DistributionFamily::OneSidedCauchy => {
                Interval::POSITIVE
            }
            DistributionFamily::Pareto { .. } => Interval::new(1.0, f64::INFINITY),
            DistributionFamily::Uniform => Interval::new(0.0, 1.0),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistributionFamily::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            DistributionFamily::Pareto { a } => {
                if x <= 1.0 {
                    0.0
                } else {
                    -(-a * x.ln()).exp_m1()
                }
            }
            DistributionFamily::Uniform => x.clamp(0.0, 1.0),
            DistributionFamily::OneSidedCauchy => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.atan() / FRAC_PI_2
                }
            }
        }
    }

    /// `F⁻¹(1 − v)`, for tail mass `v ∈ (0, 1)`.
    fn quantile_upper(&self, v: f64) -> f64 {
        match *self {
            DistributionFamily::Exponential => -v.ln(),
            DistributionFamily::Pareto { a } => v.powf(-1.0 / a),
            DistributionFamily::Uniform => 1.0 - v,
            DistributionFamily::OneSidedCauchy => 1.0 / (FRAC_PI_2 * v).tan(),
        }
    }

    fn quantile(&self, t: f64) -> f64 {
        match *self {
            DistributionFamily::Exponential => -(-t).ln_1p(),
            DistributionFamily::Uniform => t,
            DistributionFamily::OneSidedCauchy => (FRAC_PI_2 * t).tan(),
            DistributionFamily::Pareto { .. } => self.quantile_upper(1.0 - t),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match *self {
            DistributionFamily::Exponential => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x).exp()
                }
            }
            DistributionFamily::Pareto { a } => {
                if x < 1.0 {
                    0.0
                } else {
                    a * x.powf(-a - 1.0)
                }
            }
            DistributionFamily::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionFamily::OneSidedCauchy => {
                if x < 0.0 {
                    0.0
                } else {
                    2.0 / (PI * (1.0 + x * x))
                }
            }
        }
    }

    fn pdf_deriv(&self, x: f64) -> f64 {
        match *self {
            DistributionFamily::Exponential => {
                if x < 0.0 {
                    0.0
                } else {
                    -(-x).exp()
                }
            }
            DistributionFamily::Pareto { a } => {
                if x < 1.0 {
                    0.0
                } else {
                    -a * (a + 1.0) * x.powf(-a - 2.0)
                }
            }
            DistributionFamily::Uniform => 0.0,
            DistributionFamily::OneSidedCauchy => {
                if x < 0.0 {
                    0.0
                } else {
                    let d = 1.0 + x * x;
                    -4.0 * x / (PI * d * d)
                }
            }
        }
    }

    /// `f(F⁻¹(1 − v))` in closed form, accurate for tiny `v`.
    fn density_at_upper(&self, v: f64) -> f64 {
        match *self {
            DistributionFamily::Exponential => v,
            DistributionFamily::Pareto { a } => a * v.powf(1.0 + 1.0 / a),
            DistributionFamily::Uniform => 1.0,
            DistributionFamily::OneSidedCauchy => {
                let s = (FRAC_PI_2 * v).sin();
                2.0 / PI * s * s
            }
        }
    }

    fn mean(&self) -> Option<f64> {
        match *self {
            DistributionFamily::Exponential => Some(1.0),
            DistributionFamily::Pareto { a } if a > 1.0 => Some(a / (a - 1.0)),
            DistributionFamily::Pareto { .. } => None,
            DistributionFamily::Uniform => Some(0.5),
            DistributionFamily::OneSidedCauchy => None,
        }
    }
}

impl fmt::Display for DistributionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionFamily::Exponential => f.write_str("exp"),
            DistributionFamily::Pareto { a } => write!(f, "pareto:{a}"),
            DistributionFamily::Uniform => f.write_str("uniform"),
            DistributionFamily::OneSidedCauchy => f.write_str("halfcauchy"),
        }
    }
}

impl FromStr for DistributionFamily {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let err = || RiskError::Parse {
            what: "distribution",
            input: s.to_string(),
        };
        match s.to_ascii_lowercase().as_str() {
            "exp" | "exponential" => Ok(DistributionFamily::Exponential),
            "uniform" => Ok(DistributionFamily::Uniform),
            "halfcauchy" => Ok(DistributionFamily::OneSidedCauchy),
            other => {
                let a: f64 = other
                    .strip_prefix("pareto:")
                    .ok_or_else(err)?
                    .parse()
                    .map_err(|_| err())?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(err());
                }
                Ok(DistributionFamily::Pareto { a })
            }
        }
    }
}

/// A closed-form law, optionally transformed as `loc + scale·Y` with `scale > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDistribution {
    pub family: DistributionFamily,
    pub loc: f64,
    pub scale: f64,
}

impl From<DistributionFamily> for AnalyticDistribution {
    fn from(family: DistributionFamily) -> Self {
        Self {
            family,
            loc: 0.0,
            scale: 1.0,
        }
    }
}

impl AnalyticDistribution {
    pub fn exponential() -> Self {
        DistributionFamily::Exponential.into()
    }
    pub fn pareto(a: f64) -> Self {
        assert!(a > 0.0, "Pareto shape must be positive");
        DistributionFamily::Pareto { a }.into()
    }
    pub fn uniform() -> Self {
        DistributionFamily::Uniform.into()
    }
    pub fn one_sided_cauchy() -> Self {
        DistributionFamily::OneSidedCauchy.into()
    }

    /// Law of `X + c`.
    pub fn shifted(self, c: f64) -> Self {
        Self {
            loc: self.loc + c,
            ..self
        }
    }

    /// Law of `λX`, `λ > 0`.
    pub fn scaled(self, lambda: f64) -> Self {
        assert!(lambda > 0.0, "scale factor must be positive");
        Self {
            family: self.family,
            loc: self.loc * lambda,
            scale: self.scale * lambda,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn support(&self) -> Interval {
        let s = self.family.support();
        Interval::new(self.loc + self.scale * s.lo, self.loc + self.scale * s.hi)
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.loc) / self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(self.standardize(x))
    }

    pub fn quantile(&self, t: f64) -> f64 {
        self.loc + self.scale * self.family.quantile(t)
    }

    /// `F⁻¹(1 − v)`; preferred over [`Self::quantile`] near `t → 1`.
    pub fn quantile_upper(&self, v: f64) -> f64 {
        self.loc + self.scale * self.family.quantile_upper(v)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.family.pdf(self.standardize(x)) / self.scale
    }

    pub fn pdf_deriv(&self, x: f64) -> Option<f64> {
        Some(self.family.pdf_deriv(self.standardize(x)) / (self.scale * self.scale))
    }

    /// `f(F⁻¹(1 − v))`.
    pub fn density_at_upper(&self, v: f64) -> f64 {
        self.family.density_at_upper(v) / self.scale
    }

    pub fn mean(&self) -> Option<f64> {
        self.family.mean().map(|m| self.loc + self.scale * m)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: rand::Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let v: f64 = Open01.sample(rng);
                self.quantile_upper(v)
            })
            .collect()
    }
}

impl fmt::Display for AnalyticDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if self.scale != 1.0 {
            write!(f, "*{}", self.scale)?;
        }
        if self.loc != 0.0 {
            write!(f, "+{}", self.loc)?;
        }
        Ok(())
    }
}

/// Accepts `exp`, `pareto:<a>`, `uniform`, `halfcauchy`, optionally followed
/// by `*<scale>` and `+<loc>` (applied as `loc + scale·X`).
impl FromStr for AnalyticDistribution {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        let err = || RiskError::Parse {
            what: "distribution",
            input: s.to_string(),
        };
        let s = s.trim();
        let (rest, loc) = match s.split_once('+') {
            Some((head, loc)) => (head, loc.parse::<f64>().map_err(|_| err())?),
            None => (s, 0.0),
        };
        let (base, scale) = match rest.split_once('*') {
            Some((head, scale)) => (head, scale.parse::<f64>().map_err(|_| err())?),
            None => (rest, 1.0),
        };
        if !(scale > 0.0 && scale.is_finite() && loc.is_finite()) {
            return Err(err());
        }
        let family: DistributionFamily = base.parse()?;
        Ok(AnalyticDistribution { family, loc: 0.0, scale: 1.0 }
            .scaled(scale)
            .shifted(loc))
    }
}

/// `F_Z⁻¹(t) = γ′(F_X⁻¹(t))` for `Z = γ′(X)`.
pub fn pushforward_quantile(
    d: &AnalyticDistribution,
    g: &BregmanGenerator,
    t: f64,
) -> Result<f64> {
    check_probability("t", t)?;
    let x = d.quantile(t);
    g.check_domain("quantile(t)", x)?;
    Ok(g.grad(x))
}

/// `F_Z(z) = F_X((γ′)⁻¹(z))`.
pub fn pushforward_cdf(d: &AnalyticDistribution, g: &BregmanGenerator, z: f64) -> Result<f64> {
    let x = g.grad_inv(z).map_err(|_| RiskError::Domain {
        argument: "z".into(),
        value: z,
        domain: g.grad_range(),
    })?;
    Ok(d.cdf(x))
}

/// `f_Z(z) = f_X(x)/γ″(x)` with `x = (γ′)⁻¹(z)`.
pub fn pushforward_pdf(d: &AnalyticDistribution, g: &BregmanGenerator, z: f64) -> Result<f64> {
    let support = d.support();
    let out_of_support = || RiskError::Domain {
        argument: "z".into(),
        value: z,
        domain: Interval::new(
            if g.domain().contains(support.lo) { g.grad(support.lo) } else { g.grad_range().lo },
            if g.domain().contains(support.hi) { g.grad(support.hi) } else { g.grad_range().hi },
        ),
    };
    let x = g.grad_inv(z).map_err(|_| out_of_support())?;
    if !support.contains(x) {
        return Err(out_of_support());
    }
    Ok(d.pdf(x) / g.hess(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn families() -> Vec<AnalyticDistribution> {
        vec![
            AnalyticDistribution::exponential(),
            AnalyticDistribution::pareto(0.5),
            AnalyticDistribution::pareto(1.5),
            AnalyticDistribution::pareto(2.5),
            AnalyticDistribution::uniform(),
            AnalyticDistribution::one_sided_cauchy(),
            AnalyticDistribution::exponential().scaled(2.0).shifted(1.0),
            AnalyticDistribution::uniform().scaled(0.9).shifted(0.1),
        ]
    }

    fn u_grid() -> impl Iterator<Item = f64> {
        (1..=999).map(|k| k as f64 / 1000.0)
    }

    #[test]
    fn cdf_inverts_quantile() {
        for d in families() {
            for u in u_grid() {
                assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-10, "{d} at {u}");
            }
        }
    }

    #[test]
    fn quantile_is_nondecreasing() {
        for d in families() {
            let q: Vec<f64> = u_grid().map(|u| d.quantile(u)).collect();
            assert!(q.windows(2).all(|w| w[0] <= w[1]), "{d}");
        }
    }

    #[test]
    fn pdf_is_derivative_of_cdf() {
        for d in families() {
            for u in (1..100).map(|k| 0.01 * k as f64) {
                let x = d.quantile(u);
                let h = 1e-5 * x.abs().max(1e-2);
                let fd = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
                assert_relative_eq!(fd, d.pdf(x), max_relative = 1e-6);
                let fd2 = (d.pdf(x + h) - d.pdf(x - h)) / (2.0 * h);
                assert_relative_eq!(fd2, d.pdf_deriv(x).unwrap(), max_relative = 1e-5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn upper_quantile_and_density_agree_with_direct_forms() {
        for d in families() {
            for v in [0.5, 0.1, 0.01, 1e-4] {
                assert_relative_eq!(d.quantile_upper(v), d.quantile(1.0 - v), max_relative = 1e-9);
                assert_relative_eq!(
                    d.density_at_upper(v),
                    d.pdf(d.quantile_upper(v)),
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn closed_form_quantiles() {
        let t: f64 = 0.9;
        assert_relative_eq!(AnalyticDistribution::exponential().quantile(t), -(1.0 - t).ln(), max_relative = 1e-14);
        assert_relative_eq!(
            AnalyticDistribution::pareto(2.5).quantile(t),
            (1.0 - t).powf(-1.0 / 2.5),
            max_relative = 1e-13
        );
        let c = AnalyticDistribution::one_sided_cauchy();
        assert_relative_eq!(c.pdf(1.0), 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(c.quantile(0.5), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let u = AnalyticDistribution::uniform();
        assert_eq!(u.sample(5, 42), u.sample(5, 42));
        assert_ne!(u.sample(5, 42), u.sample(5, 43));
        let p = AnalyticDistribution::pareto(0.5);
        assert!(p.sample(10_000, 7).iter().all(|&x| x >= 1.0));
        assert!(u.sample(10_000, 7).iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn exponential_sample_mean() {
        let xs = AnalyticDistribution::exponential().sample(1_000_000, 2024);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn pushforward_quantile_closed_forms() {
        let exp = AnalyticDistribution::exponential();
        let har = BregmanGenerator::harmonic();
        let geo = BregmanGenerator::geometric();
        for t in [0.5_f64, 0.9, 0.95, 0.999] {
            let expected = 1.0 + 1.0 / (1.0 - t).ln();
            assert_relative_eq!(pushforward_quantile(&exp, &har, t).unwrap(), expected, max_relative = 1e-12);
            for a in [0.5, 1.5, 2.5] {
                let p = AnalyticDistribution::pareto(a);
                let expected = -(1.0 - t).ln() / a;
                assert_relative_eq!(pushforward_quantile(&p, &geo, t).unwrap(), expected, max_relative = 1e-12);
            }
        }
        let e = BregmanGenerator::euclidean();
        for d in families() {
            assert_relative_eq!(pushforward_quantile(&d, &e, 0.5).unwrap(), 2.0 * d.quantile(0.5));
        }
    }

    #[test]
    fn pushforward_round_trip_and_monotone() {
        for g in [BregmanGenerator::geometric(), BregmanGenerator::harmonic(), BregmanGenerator::identity()] {
            for d in [AnalyticDistribution::exponential(), AnalyticDistribution::pareto(1.5)] {
                let mut prev = f64::NEG_INFINITY;
                for u in u_grid() {
                    let z = pushforward_quantile(&d, &g, u).unwrap();
                    assert!(z >= prev);
                    prev = z;
                    assert!((pushforward_cdf(&d, &g, z).unwrap() - u).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn pushforward_domain_error() {
        let shifted = AnalyticDistribution::exponential().shifted(-5.0);
        assert!(matches!(
            pushforward_quantile(&shifted, &BregmanGenerator::geometric(), 0.1),
            Err(RiskError::Domain { .. })
        ));
        assert!(pushforward_pdf(&AnalyticDistribution::pareto(2.0), &BregmanGenerator::geometric(), -1.0).is_err());
    }

    #[test]
    fn pushforward_pdf_cases() {
        let e = BregmanGenerator::euclidean();
        let d = AnalyticDistribution::exponential();
        for z in [0.1, 1.0, 3.0] {
            assert_relative_eq!(pushforward_pdf(&d, &e, z).unwrap(), d.pdf(z / 2.0) / 2.0);
        }
        // Exp + geometric: finite difference of the pushforward CDF
        let g = BregmanGenerator::geometric();
        for z in [-2.0_f64, -0.5, 0.0, 0.7, 1.5] {
            let h = 1e-5;
            let fd = (pushforward_cdf(&d, &g, z + h).unwrap() - pushforward_cdf(&d, &g, z - h).unwrap()) / (2.0 * h);
            let pdf = pushforward_pdf(&d, &g, z).unwrap();
            assert_relative_eq!(pdf, fd, max_relative = 1e-7);
            assert_relative_eq!(pdf, z.exp() * (-z.exp()).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn parse_round_trip() {
        for d in families() {
            let back: AnalyticDistribution = d.to_string().parse().unwrap();
            assert_eq!(back.family, d.family);
            assert_relative_eq!(back.loc, d.loc, max_relative = 1e-15);
            assert_relative_eq!(back.scale, d.scale, max_relative = 1e-15);
        }
        assert!("pareto:-1".parse::<AnalyticDistribution>().is_err());
        assert!("normal".parse::<AnalyticDistribution>().is_err());
    }
}
