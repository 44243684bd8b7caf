//! Small numerical helpers shared across modules.

use statrs::distribution::{ContinuousCDF, Normal};

/// Compensated summation (Neumaier's variant of Kahan).
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `n·α` snapped to the nearest integer when it is within rounding noise of one.
fn scaled_rank(n: usize, alpha: f64) -> (f64, bool) {
    let x = n as f64 * alpha;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        (r, true)
    } else {
        (x, false)
    }
}

/// `⌊n·α⌋`, robust to `α` not being exactly representable.
pub fn floor_rank(n: usize, alpha: f64) -> usize {
    let (x, exact) = scaled_rank(n, alpha);
    if exact {
        x as usize
    } else {
        x.floor() as usize
    }
}

/// `⌈n·α⌉`, robust to `α` not being exactly representable.
pub fn ceil_rank(n: usize, alpha: f64) -> usize {
    let (x, exact) = scaled_rank(n, alpha);
    if exact {
        x as usize
    } else {
        x.ceil() as usize
    }
}

/// Two-sided standard normal critical value `z_{(1+level)/2}`.
pub fn two_sided_z(level: f64) -> f64 {
    if level <= 0.0 {
        return 0.0;
    }
    Normal::standard().inverse_cdf(0.5 * (1.0 + level))
}

/// Least-squares slope and intercept of `y` on `x`, with the RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    (slope, intercept, (rss / n).sqrt())
}
