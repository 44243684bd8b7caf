//! Bregman superquantiles as measures of risk.
//!
//! The Bregman superquantile of `X` at level `α` is the Bregman mean of the
//! upper `α`-tail of `X`:
//!
//! ```text
//! Q_α^γ(X) = (γ′)⁻¹( E[ γ′(X) | X ≥ F⁻¹(α) ] )
//! ```
//!
//! With `γ(x) = x²` it is the classical superquantile (CVaR); with
//! `γ(x) = x ln x − x + 1` it is the geometric mean of the tail, and so on.
//!
//! The crate is organized as
//!
//! - [`generators`]: convex generators, divergences and Bregman means;
//! - [`distributions`]: closed-form test laws and pushforwards through `γ′`;
//! - [`quadrature`] and [`oracle`]: reference values by adaptive quadrature;
//! - [`estimators`]: plug-in estimators from order statistics and CLT intervals;
//! - [`coherence`]: executable checks of the coherence axioms;
//! - [`assumptions`]: tail-growth checks that govern consistency and normality.

pub mod error;
pub mod generators;
pub mod assumptions;
pub mod coherence;
pub mod distributions;
pub mod estimators;
pub mod ingest;
pub mod numeric;
pub mod oracle;
pub mod quadrature;

pub use error::{Interval, Result, RiskError};
pub use generators::{BregmanGenerator, GeneratorFamily};
pub use distributions::{AnalyticDistribution, DistributionFamily};
pub use estimators::{EmpiricalSample, Measure, RiskEstimate, RiskMeasure};
