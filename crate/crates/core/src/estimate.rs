use serde::{Deserialize, Serialize};

/// A Monte Carlo result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation divided by `√n`.
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn exact(value: f64, n: u64, seed: u64) -> Self {
        Estimate {
            mean: value,
            std_error: 0.0,
            n,
            seed,
        }
    }

    /// `self * k`, with the error scaled by `|k|`.
    pub fn scale(self, k: f64) -> Self {
        Estimate {
            mean: self.mean * k,
            std_error: self.std_error * k.abs(),
            ..self
        }
    }

    /// Sum of independent estimates, errors added in quadrature.
    pub fn sum_independent<'a>(terms: impl IntoIterator<Item = (f64, &'a Estimate)>) -> Self {
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut n = 0;
        let mut seed = 0;
        for (k, e) in terms {
            mean += k * e.mean;
            var += (k * e.std_error).powi(2);
            n += e.n;
            seed = e.seed;
        }
        Estimate {
            mean,
            std_error: var.sqrt(),
            n,
            seed,
        }
    }

    /// Whether `|mean - target| ≤ k·std_error`.
    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }

    /// Number of standard errors separating `mean` from `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target) / self.std_error
        }
    }
}

/// Streaming mean/variance accumulator with deterministic merging.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tally {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan's parallel merge.
    pub fn merge(&mut self, other: &Tally) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (zero for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn estimate(&self, seed: u64) -> Estimate {
        Estimate {
            mean: self.mean,
            std_error: if self.n == 0 {
                0.0
            } else {
                (self.variance() / self.n as f64).sqrt()
            },
            n: self.n,
            seed,
        }
    }
}

impl FromIterator<f64> for Tally {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut t = Tally::new();
        for x in iter {
            t.push(x);
        }
        t
    }
}
