//! Simulation laboratory for the Brownian directed polymer in a spatially
//! mollified Gaussian environment.
//!
//! The crate evolves the Feynman-Kac / stochastic-heat recursion on a
//! periodic grid, computes partition functions, endpoint densities, replica
//! overlaps, martingale decompositions, and Malliavin derivative fields, and
//! runs ensemble-level estimators and hypothesis tests for the free-energy
//! rate, the overlap central limit theorem, superconcentration, subroughness,
//! and local-averaging bounds.

pub mod config;
pub mod ensemble;
pub mod environment;
pub mod error;
pub mod export;
pub mod fft;
pub mod grid;
pub mod numeric;
pub mod observables;
pub mod solver;
pub mod stats;

pub use config::ExperimentConfig;
pub use ensemble::{
    estimate_gamma, run_ensemble, run_realization, EnsembleResult, EnsembleSummary, GammaEstimate,
    RunRecord, TestReport,
};
pub use environment::{
    build_mollifier, covariance_from_mollifier, mollify_slice, sample_noise_slice, CovarianceTable,
    DomainSpec, Mollifier, MollifierShape, NoiseSlice, NoiseStream, XiSlice,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use observables::{
    accumulate_martingale, accumulate_overlap, bks_derivative_average, endpoint_mode,
    fixed_time_overlap, gradient_overlap_identity, increment_moments, local_average,
    malliavin_field, overlap_functional, overlap_functional_direct, BksConfig, BksQuantities,
    ForwardTrajectory, IncrementMoments, MalliavinField, MartingaleSeries, OverlapPlan,
    OverlapSeries, RecordPolicy, Snapshot, TrajectoryRecorder,
};
pub use solver::{
    build_propagator, forward_step, gibbs_marginal, run_backward, run_forward, BackwardState,
    BackwardTrajectory, FieldState, HeatPropagator, InitialData, KeepPolicy, PolymerModel,
    StepObserver, Terminal, TiltFault,
};
