//! Seeded percentile bootstrap for variances.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

use super::moments::SampleMoments;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCi {
    pub variance: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

/// Percentile bootstrap confidence interval for the sample variance.
/// Deterministic in `seed`.
pub fn bootstrap_variance_ci(
    xs: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<VarianceCi> {
    if xs.len() < 8 {
        return Err(Error::usage("bootstrap needs at least 8 points"));
    }
    if !(0.0 < level && level < 1.0) || resamples < 100 {
        return Err(Error::usage("bad bootstrap parameters"));
    }
    let n = xs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = Vec::with_capacity(resamples);
    let mut resample = vec![0.0; n];
    for _ in 0..resamples {
        for v in resample.iter_mut() {
            // unbiased enough index draw; n is far below 2^32
            let idx = (rng.next_u64() % n as u64) as usize;
            *v = xs[idx];
        }
        vars.push(SampleMoments::of(&resample).variance);
    }
    vars.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    let lo_idx = ((alpha * resamples as f64).floor() as usize).min(resamples - 1);
    let hi_idx = (((1.0 - alpha) * resamples as f64).ceil() as usize).min(resamples - 1);
    Ok(VarianceCi {
        variance: SampleMoments::of(xs).variance,
        lo: vars[lo_idx],
        hi: vars[hi_idx],
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn ci_brackets_truth_for_gaussian_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..2000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                2.0 * z
            })
            .collect();
        let ci = bootstrap_variance_ci(&xs, 500, 0.95, 11).unwrap();
        assert!(ci.lo < 4.0 && 4.0 < ci.hi, "CI [{}, {}]", ci.lo, ci.hi);
        assert!(ci.lo < ci.variance && ci.variance < ci.hi);
        // deterministic in the seed
        let ci2 = bootstrap_variance_ci(&xs, 500, 0.95, 11).unwrap();
        assert_eq!(ci, ci2);
    }

    #[test]
    fn small_samples_are_rejected() {
        assert!(bootstrap_variance_ci(&[1.0, 2.0], 500, 0.95, 0).is_err());
    }
}
