//! Reference values by quadrature: superquantiles, Bregman superquantiles
//! and the asymptotic variance of their plug-in estimators.
//!
//! All tail integrals are written in the tail mass `v = 1 − u`, so that
//!
//! ```text
//! Q_α^γ = (γ′)⁻¹( (1/ε) ∫_0^ε γ′(F⁻¹(1 − v)) dv ),     ε = 1 − α
//! σ²_γ  = ∫_0^ε ∫_0^ε min(v, w)(1 − max(v, w)) ℓ(v) ℓ(w) dv dw
//! ```
//!
//! with `ℓ(v) = γ″(x)/f(x)` at `x = F⁻¹(1 − v)` (the reciprocal density of
//! `Z = γ′(X)` at its own quantile). The estimator's limiting variance is
//! `σ²_γ / (γ″(Q_α^γ)² ε²)`.
//!
//! A divergent tail integral is reported as an infinite value rather than an
//! error; only a non-converging integrable case is an [`RiskError::OracleFailure`].

use crate::distributions::AnalyticDistribution;
use crate::error::{check_probability, Result, RiskError};
use crate::generators::BregmanGenerator;
use crate::quadrature::{integrate, integrate_upper_tail, integrate_upper_tail_2d, QuadratureSpec, TailIntegral};

/// Quadrature oracle with fixed tolerances.
#[derive(Debug, Clone, Copy, Default)]
pub struct Oracle {
    pub spec: QuadratureSpec,
}

impl Oracle {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    /// `(1/ε) ∫_α^1 h(F⁻¹(u)) du` on the extended real line.
    pub fn tail_mean<H: Fn(f64) -> f64>(
        &self,
        d: &AnalyticDistribution,
        alpha: f64,
        h: H,
    ) -> Result<f64> {
        check_probability("alpha", alpha)?;
        let eps = 1.0 - alpha;
        let integral = if self.spec.endpoint_substitution {
            integrate_upper_tail(&|v: f64| h(d.quantile_upper(v)), eps, &self.spec)?
        } else {
            TailIntegral::Finite(integrate(&|u: f64| h(d.quantile(u)), alpha, 1.0, &self.spec)?)
        };
        Ok(integral.value() / eps)
    }

    /// Classical superquantile `(1/(1−α)) ∫_α^1 F⁻¹(u) du`; `+∞` when the tail is not integrable.
    pub fn superquantile(&self, d: &AnalyticDistribution, alpha: f64) -> Result<f64> {
        self.tail_mean(d, alpha, |x| x)
    }

    /// Mean of `γ′(X)` over the upper `α`-tail.
    pub fn tail_mean_of_grad(
        &self,
        d: &AnalyticDistribution,
        g: &BregmanGenerator,
        alpha: f64,
    ) -> Result<f64> {
        check_probability("alpha", alpha)?;
        check_tail_in_domain(d, g, alpha)?;
        self.tail_mean(d, alpha, |x| g.grad(x))
    }

    /// Bregman superquantile `(γ′)⁻¹(E[γ′(X) | X ≥ F⁻¹(α)])`.
    pub fn bregman_superquantile(
        &self,
        d: &AnalyticDistribution,
        g: &BregmanGenerator,
        alpha: f64,
    ) -> Result<f64> {
        let m = self.tail_mean_of_grad(d, g, alpha)?;
        if m == f64::INFINITY {
            return Ok(g.domain().hi);
        }
        if m == f64::NEG_INFINITY {
            return Ok(g.domain().lo);
        }
        g.grad_inv(m)
    }

    /// `σ²_γ`, the double integral over the tail kernel.
    pub fn tail_kernel_integral(
        &self,
        d: &AnalyticDistribution,
        g: &BregmanGenerator,
        alpha: f64,
    ) -> Result<f64> {
        check_probability("alpha", alpha)?;
        check_tail_in_domain(d, g, alpha)?;
        let eps = 1.0 - alpha;
        let slope = |v: f64| {
            let x = d.quantile_upper(v);
            g.hess(x) / d.density_at_upper(v)
        };
        let kernel = |v: f64, w: f64| v.min(w) * (1.0 - v.max(w)) * slope(v) * slope(w);
        match integrate_upper_tail_2d(&kernel, eps, &self.spec)? {
            TailIntegral::Finite(i) if i.value.is_finite() && i.value > 0.0 => Ok(i.value),
            _ => Err(RiskError::VarianceDiverges),
        }
    }

    /// Limiting variance of `√n (Q̂ − Q)`: `σ²_γ / (γ″(Q)² (1−α)²)`.
    pub fn asymptotic_variance(
        &self,
        d: &AnalyticDistribution,
        g: &BregmanGenerator,
        alpha: f64,
    ) -> Result<f64> {
        let sigma2 = self.tail_kernel_integral(d, g, alpha)?;
        let q = self.bregman_superquantile(d, g, alpha)?;
        if !q.is_finite() {
            return Err(RiskError::VarianceDiverges);
        }
        let eps = 1.0 - alpha;
        let curv = g.hess(q);
        Ok(sigma2 / (curv * curv * eps * eps))
    }
}

/// Limiting variance of the empirical `α`-quantile: `α(1−α)/f(F⁻¹(α))²`.
pub fn quantile_asymptotic_variance(d: &AnalyticDistribution, alpha: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    let f = d.density_at_upper(1.0 - alpha);
    if f.is_nan() || f <= 0.0 {
        return Err(RiskError::SingularDensity { t: alpha });
    }
    Ok(alpha * (1.0 - alpha) / (f * f))
}

/// The upper `α`-tail of `d` must sit inside the generator's domain.
pub(crate) fn check_tail_in_domain(
    d: &AnalyticDistribution,
    g: &BregmanGenerator,
    alpha: f64,
) -> Result<()> {
    g.check_domain("quantile(alpha)", d.quantile(alpha))?;
    let hi = d.support().hi;
    if hi > g.domain().hi {
        return Err(RiskError::Domain {
            argument: "support upper bound".into(),
            value: hi,
            domain: g.domain(),
        });
    }
    Ok(())
}

pub fn true_superquantile(d: &AnalyticDistribution, alpha: f64) -> Result<f64> {
    Oracle::default().superquantile(d, alpha)
}

pub fn true_bregman_superquantile(
    d: &AnalyticDistribution,
    g: &BregmanGenerator,
    alpha: f64,
) -> Result<f64> {
    Oracle::default().bregman_superquantile(d, g, alpha)
}

pub fn asymptotic_variance(
    d: &AnalyticDistribution,
    g: &BregmanGenerator,
    alpha: f64,
) -> Result<f64> {
    Oracle::default().asymptotic_variance(d, g, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pushforward_pdf;
    use approx::assert_relative_eq;

    fn finite_mean_families() -> Vec<AnalyticDistribution> {
        vec![
            AnalyticDistribution::exponential(),
            AnalyticDistribution::pareto(1.5),
            AnalyticDistribution::pareto(2.5),
            AnalyticDistribution::uniform(),
            AnalyticDistribution::exponential().shifted(1.0),
        ]
    }

    #[test]
    fn exponential_superquantile() {
        let q = true_superquantile(&AnalyticDistribution::exponential(), 0.95).unwrap();
        let closed = 1.0 - 0.05_f64.ln();
        assert_relative_eq!(q, closed, max_relative = 1e-10);
        assert_relative_eq!(q, 3.995_732, max_relative = 1e-6);
    }

    #[test]
    fn pareto_superquantile() {
        let a = 2.5;
        let q = true_superquantile(&AnalyticDistribution::pareto(a), 0.95).unwrap();
        let closed = a / (a - 1.0) * 0.05_f64.powf(-1.0 / a);
        assert_relative_eq!(q, closed, max_relative = 1e-10);
        assert_relative_eq!(q, 5.524_090, max_relative = 1e-6);
    }

    #[test]
    fn cauchy_superquantile_is_infinite_but_geometric_is_finite() {
        let c = AnalyticDistribution::one_sided_cauchy();
        assert_eq!(true_superquantile(&c, 0.95).unwrap(), f64::INFINITY);
        let q = true_bregman_superquantile(&c, &BregmanGenerator::geometric(), 0.95).unwrap();
        assert!(q.is_finite());
        // independent evaluation: (1/ε)∫_0^ε ln cot(πv/2) dv on a fine midpoint grid in log v
        assert_relative_eq!(q, 34.586_505_323_703, max_relative = 1e-9);
    }

    #[test]
    fn pareto_half_geometric() {
        let a: f64 = 0.5;
        let q = true_bregman_superquantile(&AnalyticDistribution::pareto(a), &BregmanGenerator::geometric(), 0.95)
            .unwrap();
        let closed = ((1.0 - 0.05_f64.ln()) / a).exp();
        assert_relative_eq!(q, closed, max_relative = 1e-10);
        assert_relative_eq!(q, 2_955.622_439_572, max_relative = 1e-9);
        assert_eq!(true_superquantile(&AnalyticDistribution::pareto(a), 0.95).unwrap(), f64::INFINITY);
    }

    #[test]
    fn euclidean_reduces_to_classical() {
        for d in finite_mean_families() {
            for alpha in [0.5, 0.9, 0.95, 0.99] {
                let classical = true_superquantile(&d, alpha).unwrap();
                for g in [BregmanGenerator::euclidean(), BregmanGenerator::identity()] {
                    let b = true_bregman_superquantile(&d, &g, alpha).unwrap();
                    assert_relative_eq!(b, classical, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn raw_quadrature_agrees_on_benign_integrand() {
        let raw = Oracle::new(QuadratureSpec {
            endpoint_substitution: false,
            ..Default::default()
        })
        .unwrap();
        let d = AnalyticDistribution::uniform().scaled(2.0);
        let g = BregmanGenerator::exp();
        let a = raw.bregman_superquantile(&d, &g, 0.9).unwrap();
        let b = true_bregman_superquantile(&d, &g, 0.9).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn monotone_in_alpha_and_dominates_quantile() {
        let gens = [BregmanGenerator::geometric(), BregmanGenerator::harmonic(), BregmanGenerator::identity()];
        for d in [AnalyticDistribution::exponential(), AnalyticDistribution::pareto(0.5), AnalyticDistribution::pareto(2.5)]
        {
            for g in &gens {
                let mut prev = f64::NEG_INFINITY;
                for k in 1..20 {
                    let alpha = 0.05 * k as f64;
                    let q = true_bregman_superquantile(&d, g, alpha).unwrap();
                    assert!(q >= prev, "{d} {g} alpha {alpha}");
                    assert!(q >= d.quantile(alpha));
                    prev = q;
                }
            }
        }
    }

    #[test]
    fn domain_mismatch() {
        let d = AnalyticDistribution::exponential().shifted(-3.0);
        assert!(matches!(
            true_bregman_superquantile(&d, &BregmanGenerator::geometric(), 0.5),
            Err(RiskError::Domain { .. })
        ));
        // far enough in the tail the shifted law is positive
        assert!(true_bregman_superquantile(&d, &BregmanGenerator::geometric(), 0.99).is_ok());
    }

    #[test]
    fn exponential_variance_closed_form() {
        let v = asymptotic_variance(&AnalyticDistribution::exponential(), &BregmanGenerator::identity(), 0.95).unwrap();
        let eps = 0.05;
        assert_relative_eq!(v, (2.0 - eps) / eps, max_relative = 1e-8);
        assert!((v - 39.0).abs() < 1e-6);
        // Euclidean scale: the factor 2 cancels through the delta method.
        let e = asymptotic_variance(&AnalyticDistribution::exponential(), &BregmanGenerator::euclidean(), 0.95).unwrap();
        assert_relative_eq!(e, v, max_relative = 1e-8);
    }

    /// One-dimensional reduction of the kernel integral, using the symmetry
    /// of `min(v, w) − vw`: `2 ∫ (1 − w) ℓ(w) ∫_0^w v ℓ(v) dv dw`.
    fn reduced_kernel_integral(ell: &dyn Fn(f64) -> f64, eps: f64) -> f64 {
        let spec = QuadratureSpec::default();
        let inner = |w: f64| {
            integrate_upper_tail(&|v: f64| v * ell(v), w, &spec).unwrap().value()
        };
        2.0 * integrate_upper_tail(&|w: f64| (1.0 - w) * ell(w) * inner(w), eps, &spec)
            .unwrap()
            .value()
    }

    #[test]
    fn kernel_integral_matches_reduced_form() {
        let cases = [
            (AnalyticDistribution::exponential(), BregmanGenerator::harmonic()),
            (AnalyticDistribution::pareto(2.5), BregmanGenerator::identity()),
            (AnalyticDistribution::pareto(0.5), BregmanGenerator::geometric()),
            (AnalyticDistribution::one_sided_cauchy(), BregmanGenerator::geometric()),
        ];
        for (d, g) in cases {
            let ell = |v: f64| g.hess(d.quantile_upper(v)) / d.density_at_upper(v);
            let oracle = Oracle::default().tail_kernel_integral(&d, &g, 0.95).unwrap();
            assert_relative_eq!(oracle, reduced_kernel_integral(&ell, 0.05), max_relative = 1e-7);
        }
    }

    #[test]
    fn pareto_geometric_variance_closed_form() {
        // Z = ln X is exponential with rate a: σ²_Z = 39/a² on the log scale, times Q².
        for a in [0.5, 1.5, 2.5] {
            let d = AnalyticDistribution::pareto(a);
            let g = BregmanGenerator::geometric();
            let q = true_bregman_superquantile(&d, &g, 0.95).unwrap();
            let v = asymptotic_variance(&d, &g, 0.95).unwrap();
            assert_relative_eq!(v, 39.0 / (a * a) * q * q, max_relative = 1e-7);
        }
    }

    #[test]
    fn heavy_tails_have_no_variance() {
        for a in [0.5, 1.5, 2.0] {
            assert_eq!(
                asymptotic_variance(&AnalyticDistribution::pareto(a), &BregmanGenerator::identity(), 0.95),
                Err(RiskError::VarianceDiverges),
                "a = {a}"
            );
        }
        assert!(asymptotic_variance(&AnalyticDistribution::pareto(2.5), &BregmanGenerator::identity(), 0.95).is_ok());
    }

    #[test]
    fn pushforward_density_integrates_to_one() {
        let spec = QuadratureSpec::default();
        let d = AnalyticDistribution::exponential();
        let g = BregmanGenerator::geometric();
        // z = ln x ranges over ℝ; split at 0 and map each half to a tail integral
        let upper = integrate_upper_tail(&|s: f64| pushforward_pdf(&d, &g, -s.ln()).unwrap() / s, 1.0, &spec)
            .unwrap()
            .value();
        let lower = integrate_upper_tail(&|s: f64| pushforward_pdf(&d, &g, s.ln()).unwrap() / s, 1.0, &spec)
            .unwrap()
            .value();
        assert!((upper + lower - 1.0).abs() < 1e-8, "{}", upper + lower);
    }

    #[test]
    fn quantile_variance() {
        let v = quantile_asymptotic_variance(&AnalyticDistribution::exponential(), 0.95).unwrap();
        assert_relative_eq!(v, 0.95 * 0.05 / (0.05 * 0.05), max_relative = 1e-12);
    }
}
