//! Results bundle layout and manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use polymerlab_core::config::{ExperimentConfig, TOOL_VERSION};
use polymerlab_core::error::{Error, Result};

/// Paths and provenance of one simulation bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsBundle {
    pub records_paths: Vec<PathBuf>,
    pub summaries_path: PathBuf,
    pub reports_path: PathBuf,
    pub config_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
}

/// Format a horizon for file names (trailing ".0" trimmed).
pub fn t_label(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

pub fn records_path(dir: &Path, t: f64) -> PathBuf {
    dir.join(format!("records_T{}.jsonl", t_label(t)))
}

pub fn heights_dir(dir: &Path, t: f64) -> PathBuf {
    dir.join("heights").join(format!("T{}", t_label(t)))
}

impl ResultsBundle {
    /// Paths are bundle-relative so bundles are byte-identical wherever
    /// they are written.
    pub fn new(_dir: &Path, cfg: &ExperimentConfig) -> Self {
        ResultsBundle {
            records_paths: cfg
                .domain
                .t_grid
                .iter()
                .map(|&t| PathBuf::from(format!("records_T{}.jsonl", t_label(t))))
                .collect(),
            summaries_path: PathBuf::from("summaries.csv"),
            reports_path: PathBuf::from("reports.csv"),
            config_hash: cfg.hash(),
            master_seed: cfg.ensemble.master_seed,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn write_manifest(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::io(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text)
            .map_err(|e| Error::io(format!("manifest: {e}")))?;
        Ok(())
    }
}
