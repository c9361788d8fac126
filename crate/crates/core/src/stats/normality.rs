//! Moment z-tests and the parametric-bootstrap Kolmogorov-Smirnov test.
//!
//! The KS test fits mean and variance from the sample, which invalidates the
//! fixed-table critical values; the critical value is therefore simulated
//! under the fitted-normal null. The statistic is location-scale invariant,
//! so the simulation is done once per sample size and reused.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::moments::SampleMoments;

/// Two-sided z critical value at the 1% level.
pub const Z_CRIT_1PCT: f64 = 2.575_829_303_548_900_4;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTest {
    pub statistic: f64,
    pub z: f64,
    pub critical: f64,
    pub rejected: bool,
}

/// Skewness z-test at the 1% level.
pub fn skewness_z_test(m: &SampleMoments) -> ZTest {
    let z = m.skewness / m.se_skewness();
    ZTest {
        statistic: m.skewness,
        z,
        critical: Z_CRIT_1PCT,
        rejected: z.abs() > Z_CRIT_1PCT,
    }
}

/// Excess-kurtosis z-test at the 1% level.
pub fn kurtosis_z_test(m: &SampleMoments) -> ZTest {
    let z = m.excess_kurtosis / m.se_kurtosis();
    ZTest {
        statistic: m.excess_kurtosis,
        z,
        critical: Z_CRIT_1PCT,
        rejected: z.abs() > Z_CRIT_1PCT,
    }
}

/// KS distance between the sample and a normal with the sample's mean and
/// variance.
pub fn lilliefors_statistic(xs: &[f64]) -> Result<f64> {
    if xs.len() < 4 {
        return Err(Error::usage("KS test needs at least 4 points"));
    }
    let m = SampleMoments::of(xs);
    if m.variance <= 0.0 {
        return Err(Error::usage("KS test on a degenerate sample"));
    }
    let sd = m.variance.sqrt();
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal_cdf((x - m.mean) / sd);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        sup = sup.max((f - lo).abs()).max((hi - f).abs());
    }
    Ok(sup)
}

/// Critical value of the Lilliefors statistic at `level`, from `resamples`
/// parametric resamples of size `n`. Deterministic in `seed`.
pub fn lilliefors_critical_value(n: usize, resamples: usize, level: f64, seed: u64) -> Result<f64> {
    if !(0.0 < level && level < 1.0) || resamples < 100 {
        return Err(Error::usage("bad bootstrap parameters"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(resamples);
    let mut sample = vec![0.0; n];
    for _ in 0..resamples {
        for v in sample.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        stats.push(lilliefors_statistic(&sample)?);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = (((1.0 - level) * resamples as f64).ceil() as usize).min(resamples - 1);
    Ok(stats[idx])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub critical: f64,
    pub rejected: bool,
}

/// Parametric-bootstrap KS normality test.
pub fn lilliefors_test(xs: &[f64], resamples: usize, level: f64, seed: u64) -> Result<KsTest> {
    let statistic = lilliefors_statistic(xs)?;
    let critical = lilliefors_critical_value(xs.len(), resamples, level, seed)?;
    Ok(KsTest {
        statistic,
        critical,
        rejected: statistic > critical,
    })
}
