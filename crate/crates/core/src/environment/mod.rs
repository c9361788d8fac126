//! The discrete model: grid, mollifier kernel, exact discrete covariance,
//! and reproducible white-noise slice generation.

pub mod domain;
pub mod kernel;
pub mod noise;

pub use domain::DomainSpec;
pub use kernel::{
    build_mollifier, covariance_from_mollifier, CovarianceTable, Mollifier, MollifierShape,
};
pub use noise::{
    mollify_slice, mollify_slice_into, mollify_values_into, sample_noise_slice,
    sample_noise_slice_unchecked, sample_noise_values_into, NoiseSlice, NoiseStream, XiSlice,
};
