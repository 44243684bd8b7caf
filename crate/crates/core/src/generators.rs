//! Bregman generators: strictly convex functions `γ` together with their
//! derivatives, the induced divergence and the Bregman mean.
//!
//! The derivative `γ′` acts as a change of scale. Every quantity the rest of
//! the crate needs (`γ′`, `γ″`, `γ‴`, `(γ′)⁻¹`) is available through
//! [`BregmanGenerator`]. Built-in families carry closed forms; custom
//! generators may omit the inverse derivative, in which case a guarded
//! bisection is used.
//!
//! | name          | `γ(x)`                         | domain   | `γ′(x)`                    |
//! |---------------|--------------------------------|----------|----------------------------|
//! | `identity`    | `x²/2`                         | ℝ        | `x`                        |
//! | `euclidean`   | `x²`                           | ℝ        | `2x`                       |
//! | `geometric`   | `x ln x − x + 1`               | (0, ∞)   | `ln x`                     |
//! | `harmonic`    | `−ln x + x − 1`                | (0, ∞)   | `1 − 1/x`                  |
//! | `power:<β>`   | `γ″(x) = x^β`                  | (0, ∞)   | `(x^{β+1} − 1)/(β + 1)`    |
//! | `exp`         | `eˣ`                           | ℝ        | `eˣ`                       |

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Interval, Result, RiskError};

/// Shared scalar function used by custom generators.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;
const WEIGHT_TOL: f64 = 1e-12;
/// Below this relative gap the divergence switches to a Taylor expansion.
const SERIES_CUTOFF: f64 = 1e-3;

/// Built-in generator families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorFamily {
    /// `γ(x) = x²/2`; the identity change of scale (classical superquantile).
    Identity,
    Euclidean,
    Geometric,
    Harmonic,
    /// `γ″(x) = x^β` on `(0, ∞)`. `β = −1` is normalized to [`GeneratorFamily::Geometric`].
    Power(f64),
    /// `γ(x) = eˣ`. Convex but not homogeneous; used as a counter-example.
    Exp,
}

impl GeneratorFamily {
    pub fn power(beta: f64) -> Self {
        if beta == -1.0 {
            GeneratorFamily::Geometric
        } else {
            GeneratorFamily::Power(beta)
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            GeneratorFamily::Identity | GeneratorFamily::Euclidean | GeneratorFamily::Exp => {
                Interval::REAL_LINE
            }
            GeneratorFamily::Geometric | GeneratorFamily::Harmonic | GeneratorFamily::Power(_) => {
                Interval::POSITIVE
            }
        }
    }

    /// Exponent `δ` when `γ″(x) = β·x^δ`, i.e. when the induced
    /// superquantile is positively homogeneous.
    pub fn homogeneity_exponent(&self) -> Option<f64> {
        match self {
            GeneratorFamily::Identity | GeneratorFamily::Euclidean => Some(0.0),
            GeneratorFamily::Geometric => Some(-1.0),
            GeneratorFamily::Harmonic => Some(-2.0),
            GeneratorFamily::Power(beta) => Some(*beta),
            GeneratorFamily::Exp => None,
        }
    }
}

impl fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorFamily::Identity => f.write_str("identity"),
            GeneratorFamily::Euclidean => f.write_str("euclidean"),
            GeneratorFamily::Geometric => f.write_str("geometric"),
            GeneratorFamily::Harmonic => f.write_str("harmonic"),
            GeneratorFamily::Power(beta) => write!(f, "power:{beta}"),
            GeneratorFamily::Exp => f.write_str("exp"),
        }
    }
}

impl FromStr for GeneratorFamily {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_err = || RiskError::Parse {
            what: "generator",
            input: s.to_string(),
        };
        match s.to_ascii_lowercase().as_str() {
            "identity" => Ok(GeneratorFamily::Identity),
            "euclidean" => Ok(GeneratorFamily::Euclidean),
            "geometric" => Ok(GeneratorFamily::Geometric),
            "harmonic" => Ok(GeneratorFamily::Harmonic),
            "exp" => Ok(GeneratorFamily::Exp),
            other => {
                let beta = other
                    .strip_prefix("power:")
                    .ok_or_else(parse_err)?
                    .parse::<f64>()
                    .map_err(|_| parse_err())?;
                if !beta.is_finite() {
                    return Err(parse_err());
                }
                Ok(GeneratorFamily::power(beta))
            }
        }
    }
}

struct CustomFns {
    gamma: ScalarFn,
    gamma_p: ScalarFn,
    gamma_pp: ScalarFn,
    gamma_ppp: Option<ScalarFn>,
    gamma_p_inv: Option<ScalarFn>,
}

#[derive(Clone)]
enum Kind {
    Family(GeneratorFamily),
    Custom(Arc<CustomFns>),
}

/// A strictly convex generator with its derivatives and domain.
///
/// Immutable and cheap to clone.
#[derive(Clone)]
pub struct BregmanGenerator {
    name: String,
    domain: Interval,
    kind: Kind,
}

impl fmt::Debug for BregmanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BregmanGenerator")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl fmt::Display for BregmanGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl From<GeneratorFamily> for BregmanGenerator {
    fn from(family: GeneratorFamily) -> Self {
        Self {
            name: family.to_string(),
            domain: family.domain(),
            kind: Kind::Family(family),
        }
    }
}

impl FromStr for BregmanGenerator {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<GeneratorFamily>().map(Self::from)
    }
}

impl BregmanGenerator {
    pub fn identity() -> Self {
        GeneratorFamily::Identity.into()
    }
    pub fn euclidean() -> Self {
        GeneratorFamily::Euclidean.into()
    }
    pub fn geometric() -> Self {
        GeneratorFamily::Geometric.into()
    }
    pub fn harmonic() -> Self {
        GeneratorFamily::Harmonic.into()
    }
    pub fn power(beta: f64) -> Self {
        GeneratorFamily::power(beta).into()
    }
    pub fn exp() -> Self {
        GeneratorFamily::Exp.into()
    }

    /// A user-supplied generator. Without `gamma_p_inv`, the inverse of
    /// `gamma_p` is found by bisection on the domain.
    pub fn custom(
        name: impl Into<String>,
        domain: Interval,
        gamma: ScalarFn,
        gamma_p: ScalarFn,
        gamma_pp: ScalarFn,
        gamma_ppp: Option<ScalarFn>,
        gamma_p_inv: Option<ScalarFn>,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            kind: Kind::Custom(Arc::new(CustomFns {
                gamma,
                gamma_p,
                gamma_pp,
                gamma_ppp,
                gamma_p_inv,
            })),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn family(&self) -> Option<GeneratorFamily> {
        match &self.kind {
            Kind::Family(f) => Some(*f),
            Kind::Custom(_) => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.family(), Some(GeneratorFamily::Identity))
    }

    /// `γ′` is affine, so the Bregman superquantile is the classical one.
    pub fn is_affine(&self) -> bool {
        match self.family() {
            Some(GeneratorFamily::Identity | GeneratorFamily::Euclidean) => true,
            Some(GeneratorFamily::Power(beta)) => beta == 0.0,
            _ => false,
        }
    }

    pub fn check_domain(&self, argument: &str, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(RiskError::Domain {
                argument: argument.to_string(),
                value: x,
                domain: self.domain,
            })
        }
    }

    /// `γ(x)`, unchecked.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Family(f) => match *f {
                GeneratorFamily::Identity => 0.5 * x * x,
                GeneratorFamily::Euclidean => x * x,
                GeneratorFamily::Geometric => x * x.ln() - x + 1.0,
                GeneratorFamily::Harmonic => -x.ln() + x - 1.0,
                GeneratorFamily::Power(beta) => {
                    if beta == -2.0 {
                        -x.ln() + x - 1.0
                    } else {
                        (x.powf(beta + 2.0) - 1.0) / ((beta + 1.0) * (beta + 2.0))
                            - (x - 1.0) / (beta + 1.0)
                    }
                }
                GeneratorFamily::Exp => x.exp(),
            },
            Kind::Custom(c) => (c.gamma)(x),
        }
    }

    /// `γ′(x)`, unchecked.
    pub fn grad(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Family(f) => match *f {
                GeneratorFamily::Identity => x,
                GeneratorFamily::Euclidean => 2.0 * x,
                GeneratorFamily::Geometric => x.ln(),
                GeneratorFamily::Harmonic => 1.0 - 1.0 / x,
                GeneratorFamily::Power(beta) => (x.powf(beta + 1.0) - 1.0) / (beta + 1.0),
                GeneratorFamily::Exp => x.exp(),
            },
            Kind::Custom(c) => (c.gamma_p)(x),
        }
    }

    /// `γ″(x)`, unchecked.
    pub fn hess(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Family(f) => match *f {
                GeneratorFamily::Identity => 1.0,
                GeneratorFamily::Euclidean => 2.0,
                GeneratorFamily::Geometric => 1.0 / x,
                GeneratorFamily::Harmonic => 1.0 / (x * x),
                GeneratorFamily::Power(beta) => x.powf(beta),
                GeneratorFamily::Exp => x.exp(),
            },
            Kind::Custom(c) => (c.gamma_pp)(x),
        }
    }

    /// `γ‴(x)` when the generator provides it.
    pub fn third(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Family(f) => Some(match *f {
                GeneratorFamily::Identity | GeneratorFamily::Euclidean => 0.0,
                GeneratorFamily::Geometric => -1.0 / (x * x),
                GeneratorFamily::Harmonic => -2.0 / (x * x * x),
                GeneratorFamily::Power(beta) => beta * x.powf(beta - 1.0),
                GeneratorFamily::Exp => x.exp(),
            }),
            Kind::Custom(c) => c.gamma_ppp.as_ref().map(|g| g(x)),
        }
    }

    pub fn has_third(&self) -> bool {
        match &self.kind {
            Kind::Family(_) => true,
            Kind::Custom(c) => c.gamma_ppp.is_some(),
        }
    }

    /// The open image `γ′(domain)`.
    pub fn grad_range(&self) -> Interval {
        match &self.kind {
            Kind::Family(f) => match *f {
                GeneratorFamily::Identity
                | GeneratorFamily::Euclidean
                | GeneratorFamily::Geometric => Interval::REAL_LINE,
                GeneratorFamily::Harmonic => Interval::new(f64::NEG_INFINITY, 1.0),
                GeneratorFamily::Power(beta) => {
                    let edge = -1.0 / (beta + 1.0);
                    if beta + 1.0 > 0.0 {
                        Interval::new(edge, f64::INFINITY)
                    } else {
                        Interval::new(f64::NEG_INFINITY, edge)
                    }
                }
                GeneratorFamily::Exp => Interval::POSITIVE,
            },
            Kind::Custom(c) => {
                let at = |x: f64, inward: f64| {
                    if x.is_finite() {
                        (c.gamma_p)(x)
                    } else {
                        inward
                    }
                };
                Interval::new(
                    at(self.domain.lo, f64::NEG_INFINITY),
                    at(self.domain.hi, f64::INFINITY),
                )
            }
        }
    }

    /// `(γ′)⁻¹(z)`.
    pub fn grad_inv(&self, z: f64) -> Result<f64> {
        let inversion_err = || RiskError::Inversion {
            generator: self.name.clone(),
            value: z,
        };
        if !z.is_finite() {
            return Err(inversion_err());
        }
        match &self.kind {
            Kind::Family(f) => {
                if !self.grad_range().contains(z) {
                    return Err(inversion_err());
                }
                Ok(match *f {
                    GeneratorFamily::Identity => z,
                    GeneratorFamily::Euclidean => 0.5 * z,
                    GeneratorFamily::Geometric => z.exp(),
                    GeneratorFamily::Harmonic => 1.0 / (1.0 - z),
                    GeneratorFamily::Power(beta) => {
                        (1.0 + (beta + 1.0) * z).powf(1.0 / (beta + 1.0))
                    }
                    GeneratorFamily::Exp => z.ln(),
                })
            }
            Kind::Custom(c) => match &c.gamma_p_inv {
                Some(inv) => Ok(inv(z)),
                None => self.bisect_inverse(&c.gamma_p, z).ok_or_else(inversion_err),
            },
        }
    }

    fn bisect_inverse(&self, gamma_p: &ScalarFn, z: f64) -> Option<f64> {
        let Interval { lo, hi } = self.domain;
        let (mut a, mut b) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            _ => {
                let start = if self.domain.contains(0.0) {
                    0.0
                } else if lo.is_finite() {
                    lo + 1.0
                } else {
                    hi - 1.0
                };
                let mut a = start;
                let mut b = start;
                let mut step = 1.0;
                for _ in 0..2100 {
                    let fa = gamma_p(a);
                    let fb = gamma_p(b);
                    if fa <= z && z <= fb {
                        break;
                    }
                    if fa > z {
                        a = if lo.is_finite() { 0.5 * (a + lo) } else { a - step };
                    }
                    if fb < z {
                        b = if hi.is_finite() { 0.5 * (b + hi) } else { b + step };
                    }
                    step *= 2.0;
                }
                (a, b)
            }
        };
        let eval = |x: f64| {
            if x <= lo {
                f64::NEG_INFINITY
            } else if x >= hi {
                f64::INFINITY
            } else {
                gamma_p(x)
            }
        };
        if !(eval(a) <= z && z <= eval(b)) {
            return None;
        }
        for _ in 0..BISECTION_MAX_ITER {
            let mid = 0.5 * (a + b);
            if eval(mid) < z {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= BISECTION_TOL * mid.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        let x = 0.5 * (a + b);
        self.domain.contains(x).then_some(x)
    }

    /// Bregman divergence `d(x, x0) = γ(x) − γ(x0) − γ′(x0)(x − x0)`.
    pub fn divergence(&self, x: f64, x0: f64) -> Result<f64> {
        self.check_domain("x", x)?;
        self.check_domain("x0", x0)?;
        if x == x0 {
            return Ok(0.0);
        }
        let d = match &self.kind {
            Kind::Family(f) => match *f {
                GeneratorFamily::Identity => 0.5 * (x - x0) * (x - x0),
                GeneratorFamily::Euclidean => (x - x0) * (x - x0),
                // x0·φ(r) with φ(r) = r ln r − r + 1
                GeneratorFamily::Geometric => {
                    let u = x / x0 - 1.0;
                    let phi = if u.abs() < SERIES_CUTOFF {
                        u * u * (0.5 - u / 6.0 + u * u / 12.0)
                    } else {
                        (1.0 + u) * u.ln_1p() - u
                    };
                    x0 * phi
                }
                // r − 1 − ln r
                GeneratorFamily::Harmonic => {
                    let u = x / x0 - 1.0;
                    if u.abs() < SERIES_CUTOFF {
                        u * u * (0.5 - u / 3.0 + u * u / 4.0)
                    } else {
                        u - u.ln_1p()
                    }
                }
                GeneratorFamily::Power(beta) => {
                    let r = x / x0;
                    let u = r - 1.0;
                    let h = if u.abs() < SERIES_CUTOFF {
                        u * u * (0.5 + beta * u / 6.0 + beta * (beta - 1.0) * u * u / 24.0)
                    } else if beta == -2.0 {
                        u - u.ln_1p()
                    } else {
                        r * (r.powf(beta + 1.0) - 1.0) / (beta + 1.0)
                            - (r.powf(beta + 2.0) - 1.0) / (beta + 2.0)
                    };
                    x0.powf(beta + 2.0) * h
                }
                GeneratorFamily::Exp => {
                    let delta = x - x0;
                    let tail = if delta.abs() < SERIES_CUTOFF {
                        delta * delta * (0.5 + delta / 6.0 + delta * delta / 24.0)
                    } else {
                        delta.exp_m1() - delta
                    };
                    x0.exp() * tail
                }
            },
            Kind::Custom(c) => ((c.gamma)(x) - (c.gamma)(x0) - (c.gamma_p)(x0) * (x - x0)).max(0.0),
        };
        Ok(d)
    }

    /// Bregman mean `(γ′)⁻¹(Σ wᵢ γ′(xᵢ))` of a discrete law.
    pub fn bregman_mean(&self, weights_and_points: &[(f64, f64)]) -> Result<f64> {
        if weights_and_points.is_empty() {
            return Err(RiskError::EmptyInput);
        }
        let mut sum_w = 0.0;
        for &(w, _) in weights_and_points {
            if w.is_nan() || w < 0.0 {
                return Err(RiskError::InvalidWeights { sum: f64::NAN });
            }
            sum_w += w;
        }
        if (sum_w - 1.0).abs() > WEIGHT_TOL {
            return Err(RiskError::InvalidWeights { sum: sum_w });
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut acc = crate::numeric::NeumaierSum::default();
        for (i, &(w, x)) in weights_and_points.iter().enumerate() {
            self.check_domain(&format!("point[{i}]"), x)?;
            lo = lo.min(x);
            hi = hi.max(x);
            acc.add(w * self.grad(x));
        }
        let mean = self.grad_inv(acc.total())?;
        Ok(mean.clamp(lo, hi))
    }
}
