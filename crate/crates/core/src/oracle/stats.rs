use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// `Φ(x) = erfc(−x/√2)/2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Bernoulli estimate with a Wilson score interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub successes: u64,
    pub samples: u64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `max(estimate − ci_low, ci_high − estimate)`.
    pub half_width: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, samples: u64, ci_level: f64) -> Self {
        if samples == 0 {
            return Self {
                estimate: 0.0,
                successes,
                samples,
                ci_level,
                ci_low: 0.0,
                ci_high: 1.0,
                half_width: 1.0,
            };
        }
        let nf = samples as f64;
        let p = successes as f64 / nf;
        let z = normal_quantile(0.5 + ci_level / 2.0);
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let spread = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        let ci_low = if successes == 0 { 0.0 } else { (center - spread).max(0.0) };
        let ci_high = if successes == samples { 1.0 } else { (center + spread).min(1.0) };
        Self {
            estimate: p,
            successes,
            samples,
            ci_level,
            ci_low,
            ci_high,
            half_width: (p - ci_low).max(ci_high - p),
        }
    }

    /// Exact value: zero-width interval.
    pub fn exact(value: f64) -> Self {
        Self {
            estimate: value,
            successes: 0,
            samples: 0,
            ci_level: 1.0,
            ci_low: value,
            ci_high: value,
            half_width: 0.0,
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        (self.estimate - value).abs() <= self.half_width
    }
}
