//! Monte Carlo orchestration over disorder realizations.
//!
//! Every record is a pure function of `(master_seed, realization_id,
//! config)`. Realizations run in parallel; summaries are folded in
//! realization order, so merged output is independent of worker scheduling.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::environment::NoiseStream;
use crate::error::{Error, Result};
use crate::observables::{
    accumulate_martingale, accumulate_overlap, fixed_time_overlap, height_from_snapshot,
    OverlapPlan, RecordPolicy, TrajectoryRecorder,
};
use crate::solver::{run_backward, run_forward, InitialData, KeepPolicy, PolymerModel, Terminal};
use crate::stats::Accumulator;

use super::record::RunRecord;

/// Everything one realization produces beyond its record.
#[derive(Debug, Clone)]
pub struct RealizationOutput {
    pub record: RunRecord,
    /// `R(rho_step)` at snapshot steps (delta start).
    pub overlap_at: Vec<(usize, f64)>,
    /// Height fields at snapshot steps (constant start), when enabled.
    pub heights: Vec<(usize, Vec<f64>)>,
    /// `(step, site, h)` at the designated sites.
    pub h_at_sites: Vec<(usize, usize, f64)>,
}

/// Accumulated scalar statistics of one ensemble (one horizon).
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub t: f64,
    pub beta: f64,
    pub n_total: usize,
    pub n_failed: usize,
    /// Completed runs whose boundary mass exceeded the threshold; excluded
    /// from estimator inputs, still persisted.
    pub n_boundary_rejected: usize,
    pub log_z: Accumulator,
    pub o: Accumulator,
    pub m: Accumulator,
    pub m_sq: Accumulator,
    pub residual: Accumulator,
    pub abs_residual: Accumulator,
    pub exp_log_z: Accumulator,
    pub fixed_overlap: Accumulator,
    pub boundary: Accumulator,
    /// Per-record `M_T^2 + 2 log Z_T` (zero in expectation).
    pub m_identity_diff: Accumulator,
}

impl EnsembleSummary {
    fn new(t: f64, beta: f64) -> Self {
        EnsembleSummary {
            t,
            beta,
            n_total: 0,
            n_failed: 0,
            n_boundary_rejected: 0,
            log_z: Accumulator::new(),
            o: Accumulator::new(),
            m: Accumulator::new(),
            m_sq: Accumulator::new(),
            residual: Accumulator::new(),
            abs_residual: Accumulator::new(),
            exp_log_z: Accumulator::new(),
            fixed_overlap: Accumulator::new(),
            boundary: Accumulator::new(),
            m_identity_diff: Accumulator::new(),
        }
    }

    /// Runs used by estimators (completed and within the boundary budget).
    pub fn n_used(&self) -> usize {
        self.n_total - self.n_failed - self.n_boundary_rejected
    }

    fn absorb(&mut self, rec: &RunRecord, threshold: f64) {
        self.n_total += 1;
        if rec.failed {
            self.n_failed += 1;
            return;
        }
        if let Some(b) = rec.boundary_mass {
            self.boundary.push(b);
            if b > threshold {
                self.n_boundary_rejected += 1;
                return;
            }
        }
        if let (Some(lz), Some(o), Some(m), Some(res)) =
            (rec.log_z_t, rec.o_t, rec.m_t, rec.residual_t)
        {
            self.log_z.push(lz);
            self.o.push(o);
            self.m.push(m);
            self.m_sq.push(m * m);
            self.residual.push(res);
            self.abs_residual.push(res.abs());
            self.exp_log_z.push(lz.exp());
            self.m_identity_diff.push(m * m + 2.0 * lz);
        }
        if let Some(f) = rec.fixed_t_overlap {
            self.fixed_overlap.push(f);
        }
    }
}

/// Rebuild a summary from persisted records (analysis path).
pub fn summary_from_parts(
    t: f64,
    beta: f64,
    records: &[RunRecord],
    boundary_threshold: f64,
) -> EnsembleSummary {
    let mut summary = EnsembleSummary::new(t, beta);
    for r in records {
        summary.absorb(r, boundary_threshold);
    }
    summary
}

/// One ensemble: ordered records plus their merged summary.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub outputs: Vec<RealizationOutput>,
    pub summary: EnsembleSummary,
}

impl EnsembleResult {
    pub fn records(&self) -> Vec<RunRecord> {
        self.outputs.iter().map(|o| o.record.clone()).collect()
    }

    /// Accepted (used) values of one observable, in id order.
    pub fn used_values<F: Fn(&RunRecord) -> Option<f64>>(
        &self,
        threshold: f64,
        get: F,
    ) -> Vec<f64> {
        self.outputs
            .iter()
            .filter(|o| !o.record.failed && o.record.boundary_mass.map_or(true, |b| b <= threshold))
            .filter_map(|o| get(&o.record))
            .collect()
    }
}

fn failed_record(id: u64, t: f64, beta: f64, step: usize) -> RunRecord {
    RunRecord {
        realization_id: id,
        t,
        beta,
        log_z_t: None,
        o_t: None,
        m_t: None,
        qv_t: None,
        residual_t: None,
        fixed_t_overlap: None,
        boundary_mass: None,
        failed: true,
        failed_step: Some(step),
    }
}

/// Run one realization. Numerical failures produce a failed record rather
/// than an error; configuration/usage errors propagate.
pub fn run_realization(
    cfg: &ExperimentConfig,
    model: &PolymerModel,
    plan: &OverlapPlan,
    id: u64,
) -> Result<RealizationOutput> {
    let domain = &model.domain;
    let t = domain.horizon();
    let beta = domain.beta;
    let stream = NoiseStream::new(cfg.ensemble.master_seed, id);

    let mut snapshot_steps: Vec<usize> = Vec::new();
    for &st in &cfg.recording.snapshot_times {
        let steps = cfg.steps_for(st)?;
        if steps <= domain.n_steps {
            snapshot_steps.push(steps);
        }
    }

    let mut out = RealizationOutput {
        record: failed_record(id, t, beta, 0),
        overlap_at: Vec::new(),
        heights: Vec::new(),
        h_at_sites: Vec::new(),
    };

    if cfg.recording.delta_records {
        let mut policy = RecordPolicy::scalars()
            .with_snapshot_steps(&snapshot_steps)
            .with_boundary_band(2 * model.kernel.radius);
        if cfg.recording.geometric_snapshots {
            policy = policy.with_geometric_snapshots(domain.n_steps);
        }
        let mut rec =
            TrajectoryRecorder::new(*domain, InitialData::DeltaAtOrigin, policy, Some(plan));
        match run_forward(model, stream, InitialData::DeltaAtOrigin, &mut rec) {
            Ok(_) => {
                let traj = rec.finish();
                let overlap = accumulate_overlap(&traj)?;
                let mart = accumulate_martingale(&traj, &overlap)?;
                let o_t = overlap.total();
                let qv_t = beta * beta * o_t;
                let fixed = if cfg.recording.fixed_t_overlap {
                    let bwd =
                        run_backward(model, stream, Terminal::ConstantOne, 0, KeepPolicy::All)?;
                    Some(fixed_time_overlap(model, stream, &bwd)?)
                } else {
                    None
                };
                if !snapshot_steps.is_empty() {
                    let mut spectral = crate::fft::Spectral::new(domain.grid());
                    for &step in &snapshot_steps {
                        if let Some(snap) = traj.snapshot_at(step) {
                            out.overlap_at
                                .push((step, plan.of_density(&snap.density, &mut spectral)));
                        }
                    }
                }
                out.record = RunRecord {
                    realization_id: id,
                    t,
                    beta,
                    log_z_t: Some(traj.final_log_mass()),
                    o_t: Some(o_t),
                    m_t: Some(mart.total()),
                    qv_t: Some(qv_t),
                    residual_t: Some(mart.final_residual()),
                    fixed_t_overlap: fixed,
                    boundary_mass: Some(traj.boundary_mass),
                    failed: false,
                    failed_step: None,
                };
            }
            Err(Error::Numerical { step, .. }) => {
                out.record = failed_record(id, t, beta, step);
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
    } else {
        out.record.failed = false;
        out.record.failed_step = None;
    }

    if cfg.recording.heights {
        let policy = RecordPolicy {
            overlap: false,
            martingale: false,
            snapshot_steps: Vec::new(),
            boundary_band: 0,
        }
        .with_snapshot_steps(&snapshot_steps);
        let mut rec = TrajectoryRecorder::new(*domain, InitialData::ConstantOne, policy, None);
        match run_forward(model, stream, InitialData::ConstantOne, &mut rec) {
            Ok(_) => {
                let traj = rec.finish();
                for snap in &traj.snapshots {
                    let h = height_from_snapshot(snap, domain, InitialData::ConstantOne);
                    for &site in &cfg.recording.h_sites {
                        out.h_at_sites.push((snap.step, site, h[site]));
                    }
                    out.heights.push((snap.step, h));
                }
            }
            Err(Error::Numerical { step, .. }) => {
                out.record.failed = true;
                out.record.failed_step = Some(step);
            }
            Err(e) => return Err(e),
        }
    }

    Ok(out)
}

/// Run `ids` realizations of one horizon in parallel. Results are
/// independent of worker scheduling: outputs are ordered by id and the
/// summary is folded in that order.
pub fn run_ensemble(
    cfg: &ExperimentConfig,
    t: f64,
    id_base: u64,
    n: usize,
) -> Result<EnsembleResult> {
    if n < 1 {
        return Err(Error::usage("ensemble size must be >= 1"));
    }
    let model = cfg.model_for(t)?;
    let plan = OverlapPlan::new(&model.covariance)?;
    let outputs: Result<Vec<RealizationOutput>> = (0..n as u64)
        .into_par_iter()
        .map(|k| run_realization(cfg, &model, &plan, id_base + k))
        .collect();
    let outputs = outputs?;
    let mut summary = EnsembleSummary::new(t, cfg.beta);
    for o in &outputs {
        summary.absorb(&o.record, cfg.ensemble.boundary_mass_threshold);
    }
    Ok(EnsembleResult { outputs, summary })
}
