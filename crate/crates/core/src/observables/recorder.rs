//! Trajectory recording: per-step scalar series, field snapshots, and the
//! boundary-mass monitor, assembled while the solver runs.

use rustfft::num_complex::Complex;

use crate::environment::DomainSpec;
use crate::numeric::kahan_dot;
use crate::solver::{FieldState, InitialData, StepObserver};

use super::overlap::OverlapPlan;

/// What a forward run keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordPolicy {
    /// Record `R(rho_i)` per step (left endpoints).
    pub overlap: bool,
    /// Record predictable martingale increments per step.
    pub martingale: bool,
    /// Steps at which full densities are kept (sorted, deduplicated here).
    pub snapshot_steps: Vec<usize>,
    /// Sites within this distance (in sites) of the wrap seam count toward
    /// the boundary mass; monitored at snapshot steps and the final step.
    pub boundary_band: usize,
}

impl RecordPolicy {
    /// Scalars only: overlap and martingale series, no snapshots.
    pub fn scalars() -> Self {
        RecordPolicy {
            overlap: true,
            martingale: true,
            snapshot_steps: Vec::new(),
            boundary_band: 0,
        }
    }

    /// Geometric snapshot ladder `{0, 1, 2, 4, ...}` plus the final step and
    /// any explicitly requested steps.
    pub fn with_geometric_snapshots(mut self, n_steps: usize) -> Self {
        let mut s = 1usize;
        self.snapshot_steps.push(0);
        while s < n_steps {
            self.snapshot_steps.push(s);
            s *= 2;
        }
        self.snapshot_steps.push(n_steps);
        self.normalize();
        self
    }

    pub fn with_snapshot_steps(mut self, steps: &[usize]) -> Self {
        self.snapshot_steps.extend_from_slice(steps);
        self.normalize();
        self
    }

    pub fn with_boundary_band(mut self, band: usize) -> Self {
        self.boundary_band = band;
        self
    }

    fn normalize(&mut self) {
        self.snapshot_steps.sort_unstable();
        self.snapshot_steps.dedup();
    }
}

/// A retained full field.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub density: Vec<f64>,
    pub log_mass: f64,
}

/// Scalar series and snapshots recorded along one forward run.
#[derive(Debug, Clone)]
pub struct ForwardTrajectory {
    pub domain: DomainSpec,
    pub init: InitialData,
    /// `log_mass` at every step, length `n_steps + 1`.
    pub log_mass: Vec<f64>,
    /// `R(rho_i)` for `i = 0..n_steps` (empty unless recorded).
    pub overlap_values: Vec<f64>,
    /// Predictable increments `beta dt dx^d sum rho~_i xi_i` (empty unless
    /// recorded).
    pub martingale_increments: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Max over monitored steps of the `dx^d`-weighted `|rho|` mass within
    /// the seam band.
    pub boundary_mass: f64,
}

impl ForwardTrajectory {
    /// Final `log Z_T` (delta start) or log average height (constant start).
    pub fn final_log_mass(&self) -> f64 {
        *self.log_mass.last().unwrap()
    }

    pub fn snapshot_at(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.snapshots[i])
    }
}

/// Observer that assembles a [`ForwardTrajectory`].
pub struct TrajectoryRecorder<'a> {
    policy: RecordPolicy,
    plan: Option<&'a OverlapPlan>,
    domain: DomainSpec,
    seam_band_sites: Vec<usize>,
    out: ForwardTrajectory,
}

impl<'a> TrajectoryRecorder<'a> {
    /// `plan` must be given when `policy.overlap` is set.
    pub fn new(
        domain: DomainSpec,
        init: InitialData,
        policy: RecordPolicy,
        plan: Option<&'a OverlapPlan>,
    ) -> Self {
        assert!(
            !policy.overlap || plan.is_some(),
            "overlap recording requires an OverlapPlan"
        );
        let grid = domain.grid();
        let seam_band_sites = if policy.boundary_band > 0 {
            (0..grid.sites())
                .filter(|&s| grid.seam_distance(s) <= policy.boundary_band)
                .collect()
        } else {
            Vec::new()
        };
        let out = ForwardTrajectory {
            domain,
            init,
            log_mass: Vec::with_capacity(domain.n_steps + 1),
            overlap_values: Vec::with_capacity(if policy.overlap { domain.n_steps } else { 0 }),
            martingale_increments: Vec::with_capacity(if policy.martingale {
                domain.n_steps
            } else {
                0
            }),
            snapshots: Vec::with_capacity(policy.snapshot_steps.len()),
            boundary_mass: 0.0,
        };
        TrajectoryRecorder {
            policy,
            plan,
            domain,
            seam_band_sites,
            out,
        }
    }

    pub fn finish(self) -> ForwardTrajectory {
        self.out
    }

    fn monitor(&mut self, state: &FieldState) {
        if self
            .policy
            .snapshot_steps
            .binary_search(&state.step)
            .is_ok()
        {
            self.out.snapshots.push(Snapshot {
                step: state.step,
                density: state.density.clone(),
                log_mass: state.log_mass,
            });
        }
        // Skip the band-limit transient: below this time the spectral flow
        // of delta-like data still rings at the grid scale (Nyquist
        // multiplier above 1e-9), which would masquerade as seam mass.
        let t_resolve = 2.0 * self.domain.dx * self.domain.dx
            / (std::f64::consts::PI * std::f64::consts::PI)
            * (-(1e-9f64).ln());
        let resolved = state.step as f64 * self.domain.dt >= t_resolve;
        let monitored = state.step == self.domain.n_steps
            || self
                .policy
                .snapshot_steps
                .binary_search(&state.step)
                .is_ok();
        if monitored && resolved && !self.seam_band_sites.is_empty() {
            let mass: f64 = self
                .seam_band_sites
                .iter()
                .map(|&s| state.density[s].abs())
                .sum::<f64>()
                * self.domain.cell_volume();
            if mass > self.out.boundary_mass {
                self.out.boundary_mass = mass;
            }
        }
    }
}

impl StepObserver for TrajectoryRecorder<'_> {
    fn on_init(&mut self, state: &FieldState) {
        self.out.log_mass.push(state.log_mass);
        self.monitor(state);
    }

    fn on_step_start(&mut self, _step: usize, _state: &FieldState, spectrum: &[Complex<f64>]) {
        if self.policy.overlap {
            self.out
                .overlap_values
                .push(self.plan.unwrap().from_spectrum(spectrum));
        }
    }

    fn on_diffused(&mut self, _step: usize, diffused: &[f64], xi: &[f64]) {
        if self.policy.martingale {
            let inc = self.domain.beta
                * self.domain.dt
                * self.domain.cell_volume()
                * kahan_dot(diffused, xi);
            self.out.martingale_increments.push(inc);
        }
    }

    fn on_step_end(&mut self, state: &FieldState) {
        self.out.log_mass.push(state.log_mass);
        self.monitor(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{MollifierShape, NoiseStream};
    use crate::solver::{run_forward, PolymerModel};

    #[test]
    fn records_series_and_snapshots() {
        let domain = DomainSpec::new(1, 32, 0.5, 0.1, 16, 0.0).unwrap();
        let model = PolymerModel::new(domain, MollifierShape::Triangular, 1, 1.0).unwrap();
        let plan = OverlapPlan::new(&model.covariance).unwrap();
        let policy = RecordPolicy::scalars()
            .with_geometric_snapshots(domain.n_steps)
            .with_boundary_band(2);
        let mut rec =
            TrajectoryRecorder::new(domain, InitialData::DeltaAtOrigin, policy, Some(&plan));
        run_forward(
            &model,
            NoiseStream::new(1, 0),
            InitialData::DeltaAtOrigin,
            &mut rec,
        )
        .unwrap();
        let traj = rec.finish();
        assert_eq!(traj.log_mass.len(), 17);
        assert_eq!(traj.overlap_values.len(), 16);
        assert_eq!(traj.martingale_increments.len(), 16);
        // geometric ladder: 0,1,2,4,8,16
        assert_eq!(
            traj.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(),
            vec![0, 1, 2, 4, 8, 16]
        );
        // delta start: R(rho_0) = R(0)
        assert!((traj.overlap_values[0] - model.r0()).abs() < 1e-12);
        // delta start far from seam: negligible boundary mass
        assert!(traj.boundary_mass < 1e-6, "boundary {}", traj.boundary_mass);
    }
}
