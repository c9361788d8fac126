//! The scan command: sweeps over beta or horizon lists, one bundle per
//! sweep point plus a combined scaling CSV.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use polymerlab_core::config::{ExperimentConfig, TOOL_VERSION};
use polymerlab_core::ensemble::estimate_gamma;
use polymerlab_core::error::{Error, Result};
use polymerlab_core::export::{csv_preamble, fmt_float};
use polymerlab_core::stats::SampleMoments;

use crate::bundle::t_label;
use crate::simulate::run_simulate;

pub struct SweepSpec {
    pub betas: Vec<f64>,
    pub t_values: Vec<f64>,
}

struct ScanRow {
    param: &'static str,
    value: f64,
    gamma_hat: Option<f64>,
    var_logz: f64,
    var_o_over_t: f64,
}

fn summarize(
    cfg: &ExperimentConfig,
    results: &[(f64, polymerlab_core::ensemble::EnsembleResult)],
) -> Result<(Option<f64>, f64, f64)> {
    let threshold = cfg.ensemble.boundary_mass_threshold;
    let gamma = if results.len() >= 3 {
        let per_t: Vec<(f64, polymerlab_core::stats::Accumulator)> =
            results.iter().map(|(t, r)| (*t, r.summary.log_z)).collect();
        Some(estimate_gamma(&per_t)?.gamma_hat)
    } else {
        None
    };
    let (t, largest) = results
        .iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .ok_or_else(|| Error::usage("empty results"))?;
    let logz = largest.used_values(threshold, |r| r.log_z_t);
    let o = largest.used_values(threshold, |r| r.o_t);
    let var_logz = SampleMoments::of(&logz).variance;
    let var_o_over_t = SampleMoments::of(&o).variance / t;
    Ok((gamma, var_logz, var_o_over_t))
}

/// Run the sweep; one bundle subdirectory per point, plus `scan.csv`.
pub fn run_scan(cfg: &ExperimentConfig, dir: &Path, sweep: &SweepSpec) -> Result<()> {
    if sweep.betas.is_empty() && sweep.t_values.is_empty() {
        return Err(Error::config("scan sweep is empty"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("create {}: {e}", dir.display())))?;
    let mut rows: Vec<ScanRow> = Vec::new();

    for &beta in &sweep.betas {
        let mut point = cfg.clone();
        point.beta = beta;
        point.validate()?;
        let sub = dir.join(format!("beta{}", t_label(beta * 1000.0)));
        let results = run_simulate(&point, &sub)?;
        let (gamma_hat, var_logz, var_o_over_t) = summarize(&point, &results)?;
        rows.push(ScanRow {
            param: "beta",
            value: beta,
            gamma_hat,
            var_logz,
            var_o_over_t,
        });
    }

    for &t in &sweep.t_values {
        let mut point = cfg.clone();
        point.domain.t_grid = vec![t];
        point.validate()?;
        let sub = dir.join(format!("T{}", t_label(t)));
        let results = run_simulate(&point, &sub)?;
        let (gamma_hat, var_logz, var_o_over_t) = summarize(&point, &results)?;
        rows.push(ScanRow {
            param: "T",
            value: t,
            gamma_hat,
            var_logz,
            var_o_over_t,
        });
    }

    // diagnostic only: the rate is expected to grow with beta
    let beta_gammas: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.param == "beta")
        .filter_map(|r| r.gamma_hat.map(|g| (r.value, g)))
        .collect();
    if beta_gammas.len() >= 2 {
        let monotone = beta_gammas.windows(2).all(|w| w[1].1 >= w[0].1);
        println!("scan diagnostic: gamma_hat nondecreasing in beta: {monotone} ({beta_gammas:?})");
    }

    let path = dir.join("scan.csv");
    let file = fs::File::create(&path)
        .map_err(|e| Error::io(format!("create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    csv_preamble(
        &mut w,
        cfg.ensemble.master_seed,
        &cfg.hash(),
        TOOL_VERSION,
        "sweep_param,sweep_value,gamma_hat,var_log_z,var_o_over_t",
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.param,
            fmt_float(r.value),
            r.gamma_hat.map(fmt_float).unwrap_or_default(),
            fmt_float(r.var_logz),
            fmt_float(r.var_o_over_t),
        )?;
    }
    w.flush()?;
    Ok(())
}
