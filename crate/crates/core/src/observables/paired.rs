//! Fixed-horizon overlap from paired forward/backward passes.
//!
//! The fixed-`T` overlap averages both replicas under the length-`T` Gibbs
//! measure: `O^s_T = dt * sum_i R(mu_i)` with `mu_i` the Gibbs marginal at
//! step `i` (left endpoints). The passes must share the environment stream;
//! a mismatch is not detectable here and is the caller's obligation.

use rustfft::num_complex::Complex;

use crate::environment::NoiseStream;
use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::solver::backward::BackwardTrajectory;
use crate::solver::{run_forward, FieldState, InitialData, PolymerModel, StepObserver, Terminal};

use super::malliavin::path_marginal;
use super::overlap::OverlapPlan;

struct FixedOverlap<'a> {
    model: &'a PolymerModel,
    bwd: &'a BackwardTrajectory,
    plan: &'a OverlapPlan,
    spectral: Spectral,
    values: Vec<f64>,
    error: Option<crate::error::Error>,
}

impl StepObserver for FixedOverlap<'_> {
    fn on_step_start(&mut self, step: usize, state: &FieldState, _spectrum: &[Complex<f64>]) {
        if self.error.is_some() {
            return;
        }
        let Some(w) = self.bwd.at_step(step) else {
            self.error = Some(Error::usage(format!(
                "backward trajectory is missing step {step}"
            )));
            return;
        };
        match path_marginal(
            state,
            &w.weights,
            self.model.domain.cell_volume(),
            step,
            false,
        ) {
            Ok(mu) => {
                self.values
                    .push(self.plan.of_density(&mu, &mut self.spectral));
            }
            Err(e) => self.error = Some(e),
        }
    }
}

/// Compute the fixed-`T` overlap, rerunning the forward pass on `stream` and
/// pairing it with a previously computed backward trajectory (constant
/// terminal, all steps kept).
pub fn fixed_time_overlap(
    model: &PolymerModel,
    stream: NoiseStream,
    bwd: &BackwardTrajectory,
) -> Result<f64> {
    if bwd.terminal != Terminal::ConstantOne {
        return Err(Error::usage(
            "fixed_time_overlap requires a constant-terminal backward trajectory",
        ));
    }
    let plan = OverlapPlan::new(&model.covariance)?;
    let mut obs = FixedOverlap {
        model,
        bwd,
        plan: &plan,
        spectral: Spectral::new(model.domain.grid()),
        values: Vec::with_capacity(model.domain.n_steps),
        error: None,
    };
    run_forward(model, stream, InitialData::DeltaAtOrigin, &mut obs)?;
    if let Some(e) = obs.error {
        return Err(e);
    }
    Ok(model.domain.dt * crate::numeric::kahan_sum(obs.values.iter().cloned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{DomainSpec, MollifierShape};
    use crate::observables::martingale::accumulate_overlap;
    use crate::observables::overlap::OverlapPlan;
    use crate::observables::recorder::{RecordPolicy, TrajectoryRecorder};
    use crate::solver::{run_backward, KeepPolicy};

    fn model(beta: f64) -> PolymerModel {
        let domain = DomainSpec::new(1, 32, 0.5, 0.02, 15, beta).unwrap();
        PolymerModel::new(domain, MollifierShape::Triangular, 1, 1.0).unwrap()
    }

    #[test]
    fn beta_zero_fixed_overlap_equals_running_overlap() {
        let m = model(0.0);
        let stream = NoiseStream::new(12, 0);
        let bwd = run_backward(&m, stream, Terminal::ConstantOne, 0, KeepPolicy::All).unwrap();
        let o_fixed = fixed_time_overlap(&m, stream, &bwd).unwrap();

        let plan = OverlapPlan::new(&m.covariance).unwrap();
        let mut rec = TrajectoryRecorder::new(
            m.domain,
            InitialData::DeltaAtOrigin,
            RecordPolicy::scalars(),
            Some(&plan),
        );
        run_forward(&m, stream, InitialData::DeltaAtOrigin, &mut rec).unwrap();
        let o_run = accumulate_overlap(&rec.finish()).unwrap().total();
        assert!((o_fixed - o_run).abs() < 1e-12, "{o_fixed} vs {o_run}");
    }

    #[test]
    fn fixed_overlap_is_bounded_by_r0_t() {
        let m = model(1.0);
        let stream = NoiseStream::new(12, 5);
        let bwd = run_backward(&m, stream, Terminal::ConstantOne, 0, KeepPolicy::All).unwrap();
        let o_fixed = fixed_time_overlap(&m, stream, &bwd).unwrap();
        let bound = m.r0() * m.domain.horizon();
        assert!(o_fixed > 0.0);
        assert!(o_fixed <= bound * (1.0 + 1e-10), "{o_fixed} vs {bound}");
    }

    #[test]
    fn delta_terminal_is_rejected() {
        let m = model(1.0);
        let stream = NoiseStream::new(12, 5);
        let bwd = run_backward(&m, stream, Terminal::DeltaAt(0), 0, KeepPolicy::All).unwrap();
        assert!(fixed_time_overlap(&m, stream, &bwd).is_err());
    }
}
