//! Small summary statistics helpers.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error. `se` is `None` for fewer than two
/// observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: Option<f64>,
    pub count: usize,
}

impl Estimate {
    /// Standard error, or 0 when it is undefined.
    pub fn se_or_zero(&self) -> f64 {
        self.se.unwrap_or(0.0)
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> Option<f64> {
        (self.count > 1).then(|| self.m2 / (self.count - 1) as f64)
    }

    pub fn estimate(&self) -> Option<Estimate> {
        (self.count > 0).then(|| Estimate {
            mean: self.mean,
            se: self.variance().map(|v| (v / self.count as f64).sqrt()),
            count: self.count,
        })
    }
}

impl Extend<f64> for Accumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

/// Mean and standard error of a slice; `None` when empty.
pub fn estimate(xs: &[f64]) -> Option<Estimate> {
    let mut acc = Accumulator::new();
    acc.extend(xs.iter().copied());
    acc.estimate()
}

/// Proportion of successes with the binomial standard error
/// `sqrt(p(1-p)/n)`. `se` is `None` for a single trial.
pub fn proportion(successes: usize, trials: usize) -> Option<Estimate> {
    if trials == 0 {
        return None;
    }
    let p = successes as f64 / trials as f64;
    Some(Estimate {
        mean: p,
        se: (trials > 1).then(|| (p * (1.0 - p) / trials as f64).sqrt()),
        count: trials,
    })
}
