//! Martingale partial sums and the Ito-decomposition residual.
//!
//! The increments use the predictable (post-diffusion, pre-tilt) density,
//! the discrete stand-in for the left limit in the stochastic integral. The
//! residual `log Z_t - (M_t - qv_t / 2)` is the discretization defect of the
//! decomposition; it is tracked, not assumed zero.

use crate::error::{Error, Result};

use super::overlap::OverlapSeries;
use super::recorder::ForwardTrajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSeries {
    /// `M_{t_i}` for `i = 0..=n_steps`; `M_0 = 0`.
    pub m: Vec<f64>,
    /// `log Z_{t_i} - (M_{t_i} - qv_{t_i}/2)` on the same index set, where
    /// `qv_{t_i}` sums the overlap values of slices `j < i`.
    pub residual: Vec<f64>,
}

impl MartingaleSeries {
    pub fn total(&self) -> f64 {
        *self.m.last().unwrap()
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual.last().unwrap()
    }
}

/// Assemble martingale partial sums and residuals from a recorded
/// trajectory and its overlap series.
pub fn accumulate_martingale(
    traj: &ForwardTrajectory,
    overlap: &OverlapSeries,
) -> Result<MartingaleSeries> {
    let n = traj.domain.n_steps;
    if traj.martingale_increments.len() != n || traj.log_mass.len() != n + 1 {
        return Err(Error::usage(
            "trajectory was not recorded with martingale increments",
        ));
    }
    if overlap.values.len() != n {
        return Err(Error::usage("overlap series length mismatch"));
    }
    let beta2 = traj.domain.beta * traj.domain.beta;
    let mut m = Vec::with_capacity(n + 1);
    let mut residual = Vec::with_capacity(n + 1);
    let mut m_acc = 0.0;
    m.push(0.0);
    residual.push(traj.log_mass[0]);
    for i in 1..=n {
        m_acc += traj.martingale_increments[i - 1];
        m.push(m_acc);
        let qv = beta2 * overlap.o_partial[i - 1];
        residual.push(traj.log_mass[i] - (m_acc - 0.5 * qv));
    }
    Ok(MartingaleSeries { m, residual })
}

/// Overlap series of a recorded trajectory (left-endpoint rule).
pub fn accumulate_overlap(traj: &ForwardTrajectory) -> Result<OverlapSeries> {
    if traj.overlap_values.len() != traj.domain.n_steps {
        return Err(Error::usage(
            "trajectory was not recorded with overlap values",
        ));
    }
    Ok(OverlapSeries::assemble(
        traj.overlap_values.clone(),
        traj.domain.dt,
        traj.domain.beta,
    ))
}
