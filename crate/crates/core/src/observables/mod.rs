//! Paper functionals along trajectories: overlaps, martingale series,
//! Malliavin derivative fields, local averages, increment moments, and the
//! endpoint mode.

pub mod bks;
pub mod height;
pub mod malliavin;
pub mod martingale;
pub mod overlap;
pub mod paired;
pub mod recorder;

pub use bks::{bks_derivative_average, BksConfig, BksQuantities};
pub use height::{
    gradient_overlap_identity, height_from_snapshot, increment_moments, local_average,
    mean_square_gradient, GradientOverlapReport, IncrementMoments,
};
pub use malliavin::{malliavin_field, MalliavinField};
pub use martingale::{accumulate_martingale, accumulate_overlap, MartingaleSeries};
pub use overlap::{
    endpoint_mode, overlap_functional, overlap_functional_direct, OverlapPlan, OverlapSeries,
};
pub use paired::fixed_time_overlap;
pub use recorder::{ForwardTrajectory, RecordPolicy, Snapshot, TrajectoryRecorder};
