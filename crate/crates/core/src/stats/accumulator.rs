//! Mergeable moment statistics (Welford / Chan pooled combination).

use serde::{Deserialize, Serialize};

/// Streaming count/mean/M2/min/max with exact pooled merging. Merging in a
/// fixed order is bit-deterministic within a build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator::new()
    }
}

impl Accumulator {
    pub fn new() -> Self {
        Accumulator {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        if x < self.min {
            self.min = x;
        }
        if x > self.max {
            self.max = x;
        }
    }

    /// Pooled combination of two accumulators.
    pub fn merge(a: &Accumulator, b: &Accumulator) -> Accumulator {
        if a.count == 0 {
            return *b;
        }
        if b.count == 0 {
            return *a;
        }
        let count = a.count + b.count;
        let delta = b.mean - a.mean;
        let nf = count as f64;
        let mean = a.mean + delta * b.count as f64 / nf;
        let m2 = a.m2 + b.m2 + delta * delta * (a.count as f64) * (b.count as f64) / nf;
        Accumulator {
            count,
            mean,
            m2,
            min: a.min.min(b.min),
            max: a.max.max(b.max),
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count as f64 - 1.0)
        }
    }

    /// Standard error of the mean.
    pub fn se_mean(&self) -> f64 {
        if self.count == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_slice(xs: &[f64]) -> Accumulator {
        let mut a = Accumulator::new();
        for &x in xs {
            a.push(x);
        }
        a
    }

    #[test]
    fn matches_two_pass_moments() {
        let xs: Vec<f64> = (0..100)
            .map(|i| ((i * 37) % 19) as f64 * 0.3 - 2.0)
            .collect();
        let a = from_slice(&xs);
        let mean: f64 = xs.iter().sum::<f64>() / xs.len() as f64;
        let var: f64 =
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() as f64 - 1.0);
        assert!((a.mean - mean).abs() < 1e-12);
        assert!((a.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..64).map(|i| (i as f64 * 0.77).sin()).collect();
        let whole = from_slice(&xs);
        let merged = Accumulator::merge(&from_slice(&xs[..20]), &from_slice(&xs[20..]));
        assert_eq!(whole.count, merged.count);
        assert!((whole.mean - merged.mean).abs() < 1e-13);
        assert!((whole.m2 - merged.m2).abs() < 1e-11);
        assert_eq!(whole.min, merged.min);
        assert_eq!(whole.max, merged.max);
    }

    #[test]
    fn merge_is_associative_up_to_roundoff() {
        let xs: Vec<f64> = (0..90).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let (a, b, c) = (
            from_slice(&xs[..30]),
            from_slice(&xs[30..60]),
            from_slice(&xs[60..]),
        );
        let left = Accumulator::merge(&Accumulator::merge(&a, &b), &c);
        let right = Accumulator::merge(&a, &Accumulator::merge(&b, &c));
        assert_eq!(left.count, right.count);
        assert!((left.mean - right.mean).abs() < 1e-13);
        assert!((left.m2 - right.m2).abs() < 1e-10);
    }

    #[test]
    fn empty_merge_is_identity() {
        let a = from_slice(&[1.0, 2.0]);
        let e = Accumulator::new();
        assert_eq!(Accumulator::merge(&a, &e), a);
        assert_eq!(Accumulator::merge(&e, &a), a);
    }
}
