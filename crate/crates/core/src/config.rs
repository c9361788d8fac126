//! Experiment configuration: a single self-describing TOML file validated
//! against every module precondition before any compute, plus the config
//! hash embedded in all outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::environment::{build_mollifier, DomainSpec, MollifierShape};
use crate::error::{Error, Result};
use crate::solver::{PolymerModel, TiltFault};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub d: usize,
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    /// Horizons to simulate; each must be an integer multiple of `dt`.
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub shape: MollifierShape,
    pub radius: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleBlock {
    /// Realizations per horizon.
    pub n_realizations: usize,
    /// Master seed. TOML integers are signed 64-bit, so configured seeds
    /// must stay below 2^63 (the full u64 range remains usable through the
    /// library API).
    pub master_seed: u64,
    /// Delta-start records with more seam mass than this are excluded from
    /// estimators (still persisted).
    pub boundary_mass_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordingBlock {
    /// Record the delta-start scalar series (log Z, overlap, martingale).
    pub delta_records: bool,
    /// Keep a geometric ladder of density snapshots.
    pub geometric_snapshots: bool,
    /// Times (multiples of dt) at which full fields are snapshotted.
    pub snapshot_times: Vec<f64>,
    /// Also run the constant-start pass and keep height fields at the
    /// snapshot times.
    pub heights: bool,
    /// Sites at which height values are extracted per snapshot.
    pub h_sites: Vec<usize>,
    /// Compute the fixed-horizon overlap per realization (adds a backward
    /// pass that keeps every step; memory `O(n_steps * n^d)`).
    pub fixed_t_overlap: bool,
    /// Target sites for Malliavin derivative fields in the verify suite.
    pub malliavin_targets: Vec<usize>,
    /// Box half-widths (physical) for the local-averaging statistics.
    pub bks_m_grid: Vec<f64>,
    /// Number of slice samples for the derivative averages.
    pub bks_s_samples: usize,
    /// Cost guard for the derivative averages.
    pub bks_max_box_sites: usize,
    /// Realizations used by the derivative averages (0 disables them).
    pub bks_realizations: usize,
    /// Horizon for the derivative averages (capped by the largest grid
    /// horizon).
    pub bks_t: f64,
}

impl Default for RecordingBlock {
    fn default() -> Self {
        RecordingBlock {
            delta_records: true,
            geometric_snapshots: true,
            snapshot_times: Vec::new(),
            heights: false,
            h_sites: Vec::new(),
            fixed_t_overlap: false,
            malliavin_targets: vec![0],
            bks_m_grid: vec![1.0, 2.0, 4.0],
            bks_s_samples: 12,
            bks_max_box_sites: 64,
            bks_realizations: 0,
            bks_t: 50.0,
        }
    }
}

/// Optional parameter sweep for the scan command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub betas: Vec<f64>,
    pub t_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceBlock {
    /// Band for the CLT variance ratios (pilot-derived, not paper-derived).
    pub variance_ratio_lo: f64,
    pub variance_ratio_hi: f64,
    /// Max spread (max/min) of fitted constants across a grid.
    pub fitted_constant_spread: f64,
    /// Sigma multiplier for statistical identity checks.
    pub sigma: f64,
    /// Level for the normality tests.
    pub test_level: f64,
    /// Bootstrap resamples for KS critical values.
    pub ks_resamples: usize,
    /// Bootstrap resamples for variance CIs.
    pub variance_resamples: usize,
    /// The mean-Z check runs only when `beta^2 R(0) T <= this` (heavy tails
    /// otherwise).
    pub light_tail_max: f64,
}

impl Default for ToleranceBlock {
    fn default() -> Self {
        ToleranceBlock {
            variance_ratio_lo: 0.75,
            variance_ratio_hi: 1.25,
            fitted_constant_spread: 4.0,
            sigma: 3.0,
            test_level: 0.01,
            ks_resamples: 2000,
            variance_resamples: 1000,
            light_tail_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Output directory; overridable with --out or POLYMERLAB_OUT.
    pub dir: PathBuf,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainBlock,
    pub kernel: KernelBlock,
    pub beta: f64,
    pub ensemble: EnsembleBlock,
    #[serde(default)]
    pub recording: RecordingBlock,
    #[serde(default)]
    pub tolerance: ToleranceBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    /// Debug hook for the verify suite ("tilt-sign" flips the Ito
    /// correction). Not set in normal runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<String>,
}

impl ExperimentConfig {
    /// The reference desk configuration.
    pub fn desk_default() -> Self {
        ExperimentConfig {
            domain: DomainBlock {
                d: 1,
                n: 512,
                dx: 0.25,
                dt: 0.01,
                t_grid: vec![25.0, 50.0, 100.0, 200.0],
            },
            kernel: KernelBlock {
                shape: MollifierShape::Triangular,
                radius: 1,
                amplitude: 1.0,
            },
            beta: 1.0,
            ensemble: EnsembleBlock {
                n_realizations: 2000,
                master_seed: 20260809,
                boundary_mass_threshold: 1e-4,
            },
            recording: RecordingBlock::default(),
            tolerance: ToleranceBlock::default(),
            output: OutputBlock::default(),
            sweep: None,
            inject_fault: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::config(format!("config parse failure: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::io(format!("config serialization: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)
            .map_err(|e| Error::io(format!("cannot write config {}: {e}", path.display())))?;
        Ok(())
    }

    /// SHA-256 of the canonical serialized form.
    pub fn hash(&self) -> String {
        let text = self.to_toml().expect("config serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        let digest = h.finalize();
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Steps for a horizon, requiring it to sit on the time grid.
    pub fn steps_for(&self, t: f64) -> Result<usize> {
        let steps = (t / self.domain.dt).round();
        if steps < 0.0 || (t - steps * self.domain.dt).abs() > 1e-9 * self.domain.dt.max(t) {
            return Err(Error::config(format!(
                "horizon {t} is not an integer multiple of dt {}",
                self.domain.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn fault(&self) -> Result<TiltFault> {
        match self.inject_fault.as_deref() {
            None => Ok(TiltFault::None),
            Some("tilt-sign") => Ok(TiltFault::FlipItoSign),
            Some(other) => Err(Error::config(format!("unknown fault mode '{other}'"))),
        }
    }

    /// Validate every module precondition reachable from the configuration.
    pub fn validate(&self) -> Result<()> {
        if self.domain.t_grid.is_empty() {
            return Err(Error::config("t_grid must be nonempty"));
        }
        let mut domain = DomainSpec::new(
            self.domain.d,
            self.domain.n,
            self.domain.dx,
            self.domain.dt,
            0,
            self.beta,
        )?;
        for &t in &self.domain.t_grid {
            domain.n_steps = self.steps_for(t)?;
        }
        // kernel preconditions, including wrap safety
        build_mollifier(
            self.kernel.shape,
            self.kernel.radius,
            self.kernel.amplitude,
            &domain,
        )?;
        if self.ensemble.n_realizations < 1 {
            return Err(Error::config("n_realizations must be >= 1"));
        }
        if self.ensemble.master_seed > i64::MAX as u64 {
            return Err(Error::config(
                "master_seed must fit a TOML integer (below 2^63)",
            ));
        }
        if !(self.ensemble.boundary_mass_threshold > 0.0) {
            return Err(Error::config("boundary_mass_threshold must be > 0"));
        }
        for &site in self
            .recording
            .h_sites
            .iter()
            .chain(&self.recording.malliavin_targets)
        {
            if site >= domain.sites() {
                return Err(Error::config(format!("site {site} out of grid")));
            }
        }
        for &t in &self.recording.snapshot_times {
            let max_t = self
                .domain
                .t_grid
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            self.steps_for(t)?;
            if t > max_t {
                return Err(Error::config(format!(
                    "snapshot time {t} beyond the largest horizon"
                )));
            }
        }
        for &m in &self.recording.bks_m_grid {
            let m_sites = (m / self.domain.dx).round() as usize;
            if 2 * m_sites + 1 > self.domain.n {
                return Err(Error::config(format!("box half-width {m} exceeds grid")));
            }
        }
        if self.recording.bks_realizations > 0 {
            if self.domain.d != 1 {
                return Err(Error::config("derivative averages require d = 1"));
            }
            self.steps_for(self.recording.bks_t)?;
            if self.recording.bks_s_samples == 0 {
                return Err(Error::config("bks_s_samples must be > 0"));
            }
        }
        let tol = &self.tolerance;
        if !(tol.variance_ratio_lo > 0.0 && tol.variance_ratio_hi > tol.variance_ratio_lo) {
            return Err(Error::config("bad variance ratio band"));
        }
        if !(tol.sigma > 0.0) || !(0.0 < tol.test_level && tol.test_level < 1.0) {
            return Err(Error::config("bad tolerance block"));
        }
        self.fault()?;
        Ok(())
    }

    /// The immutable model for one horizon.
    pub fn model_for(&self, t: f64) -> Result<PolymerModel> {
        let n_steps = self.steps_for(t)?;
        let domain = DomainSpec::new(
            self.domain.d,
            self.domain.n,
            self.domain.dx,
            self.domain.dt,
            n_steps,
            self.beta,
        )?;
        let model = PolymerModel::new(
            domain,
            self.kernel.shape,
            self.kernel.radius,
            self.kernel.amplitude,
        )?;
        Ok(model.with_fault(self.fault()?))
    }
}
