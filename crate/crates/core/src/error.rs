use std::fmt;

use thiserror::Error;

/// An open real interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Membership in the open interval. NaN is never contained.
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RiskError {
    #[error("{argument} = {value} lies outside the domain {domain}")]
    Domain {
        argument: String,
        value: f64,
        domain: Interval,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("weights sum to {sum}, expected 1")]
    InvalidWeights { sum: f64 },

    #[error("probability {name} = {value} must lie in {allowed}")]
    InvalidProbability {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("alpha = {alpha} leaves no order statistic above floor(n*alpha) for n = {n}")]
    TailTooSmall { n: usize, alpha: f64 },

    #[error("sample needs at least {required} values, got {n}")]
    SampleTooSmall { n: usize, required: usize },

    #[error("{value} lies outside the range of the derivative of generator {generator}")]
    Inversion { generator: String, value: f64 },

    #[error("quadrature did not converge: value {value}, estimated error {abs_error} after {subdivisions} subdivisions")]
    OracleFailure {
        value: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    #[error("asymptotic variance diverges")]
    VarianceDiverges,

    #[error("no confidence interval: {0}")]
    NoInterval(String),

    #[error("density vanishes at t = {t}")]
    SingularDensity { t: f64 },

    #[error("missing capability: {0}")]
    Capability(String),

    #[error("unstable tail fit: slope {slope}, residual {residual}")]
    UnstableFit { slope: f64, residual: f64 },

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, RiskError>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(RiskError::InvalidProbability {
            name,
            value,
            allowed: "(0, 1)",
        })
    }
}
