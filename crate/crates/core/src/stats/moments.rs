//! Two-pass sample moments with the standard errors used by the moment
//! normality tests.

use crate::numeric::kahan_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased variance.
    pub variance: f64,
    /// Sample skewness `g1 = m3 / m2^{3/2}`.
    pub skewness: f64,
    /// Sample excess kurtosis `g2 = m4 / m2^2 - 3`.
    pub excess_kurtosis: f64,
}

impl SampleMoments {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let nf = n as f64;
        let mean = kahan_sum(xs.iter().cloned()) / nf;
        let m2 = kahan_sum(xs.iter().map(|&x| (x - mean).powi(2))) / nf;
        let m3 = kahan_sum(xs.iter().map(|&x| (x - mean).powi(3))) / nf;
        let m4 = kahan_sum(xs.iter().map(|&x| (x - mean).powi(4))) / nf;
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
        let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
        SampleMoments {
            n,
            mean,
            variance,
            skewness,
            excess_kurtosis,
        }
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Exact normal-theory standard error of the sample skewness.
    pub fn se_skewness(&self) -> f64 {
        let n = self.n as f64;
        (6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0))).sqrt()
    }

    /// Exact normal-theory standard error of the sample excess kurtosis.
    pub fn se_kurtosis(&self) -> f64 {
        let n = self.n as f64;
        (24.0 * n * (n - 1.0) * (n - 1.0) / ((n - 3.0) * (n - 2.0) * (n + 3.0) * (n + 5.0))).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_sample_has_zero_skew() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let m = SampleMoments::of(&xs);
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.skewness, 0.0);
        assert!((m.variance - 2.5).abs() < 1e-14);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let xs = [3.0; 10];
        let m = SampleMoments::of(&xs);
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.skewness, 0.0);
        assert_eq!(m.excess_kurtosis, 0.0);
    }
}
