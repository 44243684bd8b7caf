//! Adaptive Gauss–Kronrod quadrature with tail handling for integrands that
//! blow up at one endpoint.
//!
//! Tail integrals `∫_0^ε h(v) dv` are summed over dyadic shells
//! `[ε·2^{−k−1}, ε·2^{−k}]`. Each shell is smooth, so the 21-point rule
//! converges quickly inside it. Shell values of an integrable power
//! singularity decay geometrically; the remainder after the last shell is
//! added as a geometric tail. Shells that stop decaying for
//! [`NON_DECAY_SHELLS`] consecutive steps mark the integral as divergent.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};

/// Consecutive non-decaying shells after which a tail integral is declared divergent.
pub const NON_DECAY_SHELLS: usize = 8;
/// A shell ratio above this counts as "not decaying".
const NON_DECAY_RATIO: f64 = 0.999;
const MAX_SHELLS: usize = 1100;

// Nodes and weights of the 21-point Kronrod rule and its embedded 10-point
// Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_067_640_607,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for the oracle integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Integrate tails shell by shell in the tail mass `v = 1 − u`
    /// instead of directly in `u`.
    pub endpoint_substitution: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            endpoint_substitution: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions > 0 {
            Ok(())
        } else {
            Err(RiskError::Parse {
                what: "quadrature spec",
                input: format!("{self:?}"),
            })
        }
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailIntegral {
    Finite(Integral),
    /// The integral diverges; `sign` is the sign of the accumulated shells.
    Divergent { sign: f64 },
}

impl TailIntegral {
    /// Value on the extended real line.
    pub fn value(&self) -> f64 {
        match self {
            TailIntegral::Finite(i) => i.value,
            TailIntegral::Divergent { sign } => sign * f64::INFINITY,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

/// One application of the 21-point Kronrod rule. Returns `(value, error)`.
pub fn gauss_kronrod_21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half);
    (res_k * half, err)
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let (value, error) = gauss_kronrod_21(f, a, b);
    let mut pieces = vec![Piece { a, b, value, error, splittable: true }];
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 21;

    while total_err > spec.tolerance(total) && total.is_finite() {
        if pieces.len() >= spec.max_subdivisions {
            break;
        }
        let Some(idx) = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
        else {
            break;
        };
        let mid = 0.5 * (pieces[idx].a + pieces[idx].b);
        let (pa, pb) = (pieces[idx].a, pieces[idx].b);
        if pb - pa <= 64.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            pieces[idx].splittable = false;
            continue;
        }
        let (v1, e1) = gauss_kronrod_21(f, pa, mid);
        let (v2, e2) = gauss_kronrod_21(f, mid, pb);
        evaluations += 42;
        pieces[idx] = Piece { a: pa, b: mid, value: v1, error: e1, splittable: true };
        pieces.push(Piece { a: mid, b: pb, value: v2, error: e2, splittable: true });
        total = pieces.iter().map(|p| p.value).sum();
        total_err = pieces.iter().map(|p| p.error).sum();
    }

    if total_err.is_nan() || total_err > spec.tolerance(total) {
        return Err(RiskError::OracleFailure {
            value: total,
            abs_error: total_err,
            subdivisions: pieces.len(),
        });
    }
    Ok(Integral {
        value: total,
        abs_error: total_err,
        subdivisions: pieces.len(),
        evaluations,
    })
}

/// `∫_0^ε h(v) dv` where `h` may be singular as `v → 0⁺`.
pub fn integrate_upper_tail<F: Fn(f64) -> f64 + ?Sized>(
    h: &F,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<TailIntegral> {
    let mut total: f64 = 0.0;
    let mut total_err = 0.0;
    let mut subdivisions = 0;
    let mut evaluations = 0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut non_decay = 0;
    let mut hi = eps;

    for k in 0..MAX_SHELLS {
        let lo = 0.5 * hi;
        let shell_spec = QuadratureSpec {
            abs_tol: spec.abs_tol * (hi - lo) / eps,
            ..*spec
        };
        let shell = match integrate(h, lo, hi, &shell_spec) {
            Ok(s) => s,
            Err(RiskError::OracleFailure { value, .. }) if !value.is_finite() => {
                return Ok(TailIntegral::Divergent {
                    sign: if value.is_nan() { 1.0 } else { value.signum() },
                });
            }
            Err(e) => return Err(e),
        };
        if !shell.value.is_finite() || !(total + shell.value).is_finite() {
            let sign = if shell.value.is_nan() { 1.0 } else { (total + shell.value).signum() };
            return Ok(TailIntegral::Divergent { sign });
        }
        total += shell.value;
        total_err += shell.abs_error;
        subdivisions += shell.subdivisions;
        evaluations += shell.evaluations;
        let size = shell.value.abs();

        if let Some(p) = prev {
            let ratio = if p == 0.0 {
                if size == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                size / p
            };
            if ratio > NON_DECAY_RATIO {
                non_decay += 1;
                if non_decay >= NON_DECAY_SHELLS {
                    return Ok(TailIntegral::Divergent {
                        sign: if total == 0.0 { 1.0 } else { total.signum() },
                    });
                }
            } else {
                non_decay = 0;
            }
            if k >= 2 && non_decay == 0 {
                let r = prev_ratio.map_or(ratio, |q| q.max(ratio));
                if r < 1.0 {
                    let tail = shell.value * r / (1.0 - r);
                    if tail.abs() <= 0.1 * spec.tolerance(total) {
                        total += tail;
                        total_err += tail.abs();
                        return Ok(TailIntegral::Finite(Integral {
                            value: total,
                            abs_error: total_err,
                            subdivisions,
                            evaluations,
                        }));
                    }
                }
            }
            prev_ratio = Some(ratio);
        }
        prev = Some(size);
        hi = lo;
        if hi < f64::MIN_POSITIVE {
            break;
        }
    }
    Err(RiskError::OracleFailure {
        value: total,
        abs_error: total_err,
        subdivisions,
    })
}

/// `∫_0^ε ∫_0^ε h(v, w) dv dw` for integrands that may be singular along
/// `v → 0`, `w → 0` and have a kink on the diagonal `v = w`.
///
/// The outer variable is `w`; the inner integral is split at `v = w`.
pub fn integrate_upper_tail_2d<F: Fn(f64, f64) -> f64 + ?Sized>(
    h: &F,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<TailIntegral> {
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-6,
        ..*spec
    };
    let failure: RefCell<Option<RiskError>> = RefCell::new(None);

    let inner = |w: f64| -> f64 {
        if failure.borrow().is_some() {
            return f64::NAN;
        }
        let below = match integrate_upper_tail(&|v: f64| h(v, w), w, &inner_spec) {
            Ok(TailIntegral::Finite(i)) => i.value,
            Ok(TailIntegral::Divergent { sign }) => return sign * f64::INFINITY,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                return f64::NAN;
            }
        };
        let mut above = 0.0;
        let mut lo = w;
        while lo < eps {
            let hi = (2.0 * lo).min(eps);
            match integrate(&|v: f64| h(v, w), lo, hi, &inner_spec) {
                Ok(i) => above += i.value,
                Err(RiskError::OracleFailure { value, .. }) if value.is_infinite() => {
                    return value;
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    return f64::NAN;
                }
            }
            lo = hi;
        }
        below + above
    };

    let result = integrate_upper_tail(&inner, eps, spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result
}
