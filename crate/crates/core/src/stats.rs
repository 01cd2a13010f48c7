//! Streaming estimators used by the chain driver and the sweeps.

use serde::{Deserialize, Serialize};

/// Default number of batches for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 64;

/// Streaming batch-means estimator for the mean of a correlated sequence
/// of known length.
#[derive(Clone, Debug)]
pub struct BatchMeans {
    batch_len: u64,
    batches: usize,
    in_batch: u64,
    batch_sum: f64,
    batch_means: Vec<f64>,
    total_sum: f64,
    count: u64,
}

impl BatchMeans {
    /// `total` is the expected number of observations. Observations past
    /// the last full batch still enter the mean but not the error estimate.
    pub fn new(total: u64, batches: usize) -> Self {
        let batches = batches.max(2);
        let batch_len = (total / batches as u64).max(1);
        Self {
            batch_len,
            batches,
            in_batch: 0,
            batch_sum: 0.0,
            batch_means: Vec::with_capacity(batches),
            total_sum: 0.0,
            count: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.total_sum += v;
        self.count += 1;
        if self.batch_means.len() < self.batches {
            self.batch_sum += v;
            self.in_batch += 1;
            if self.in_batch == self.batch_len {
                self.batch_means
                    .push(self.batch_sum / self.batch_len as f64);
                self.batch_sum = 0.0;
                self.in_batch = 0;
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_sum / self.count as f64
        }
    }

    /// Standard error of the mean from the spread of the batch means;
    /// `NaN` with fewer than two complete batches.
    pub fn stderr(&self) -> f64 {
        let b = self.batch_means.len();
        if b < 2 {
            return f64::NAN;
        }
        let m = self.batch_means.iter().sum::<f64>() / b as f64;
        let var = self
            .batch_means
            .iter()
            .map(|x| (x - m) * (x - m))
            .sum::<f64>()
            / (b - 1) as f64;
        (var / b as f64).sqrt()
    }
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean for independent observations.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for RunningMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = RunningMoments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Least-squares line `y = a + b x`; returns `(slope, slope stderr, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let se = if x.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, se, intercept)
}
