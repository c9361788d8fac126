//! Statistical machinery for the ensemble module: mergeable accumulators,
//! sample moments, normality tests, bootstrap intervals, and weighted
//! regression.

pub mod accumulator;
pub mod bootstrap;
pub mod moments;
pub mod normality;
pub mod regression;

pub use accumulator::Accumulator;
pub use bootstrap::{bootstrap_variance_ci, VarianceCi};
pub use moments::SampleMoments;
pub use normality::{
    kurtosis_z_test, lilliefors_critical_value, lilliefors_statistic, lilliefors_test, normal_cdf,
    skewness_z_test, KsTest, ZTest, Z_CRIT_1PCT,
};
pub use regression::{weighted_least_squares, WlsFit};
