//! The analyze command: estimators and hypothesis tests over persisted
//! records (and height dumps when present).

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use polymerlab_core::config::{ExperimentConfig, TOOL_VERSION};
use polymerlab_core::ensemble::{
    bks_reports, bound_suite, clt_report, estimate_gamma, ez_check, m_checks,
    overlap_gamma_consistency, read_records, variance_scaling, RunRecord, TestReport,
};
use polymerlab_core::environment::NoiseStream;
use polymerlab_core::error::{Error, Result};
use polymerlab_core::export::{csv_preamble, read_field, write_report_rows, REPORT_HEADER};
use polymerlab_core::observables::{bks_derivative_average, BksConfig};
use polymerlab_core::stats::Accumulator;

use crate::bundle::{heights_dir, records_path};

pub struct LoadedRecords {
    pub t: f64,
    pub records: Vec<RunRecord>,
}

/// Read and hash-check one records file.
pub fn load_records(
    path: &Path,
    expected_hash: &str,
    allow_mismatch: bool,
) -> Result<Vec<RunRecord>> {
    let file =
        fs::File::open(path).map_err(|e| Error::io(format!("open {}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let (header, records) = read_records(&mut reader)?;
    if header.config_hash != expected_hash {
        if allow_mismatch {
            eprintln!(
                "warning: {} was produced under config hash {} (current {})",
                path.display(),
                header.config_hash,
                expected_hash
            );
        } else {
            return Err(Error::Config(format!(
                "records {} config hash {} does not match current config {}; pass --allow-hash-mismatch to proceed",
                path.display(),
                header.config_hash,
                expected_hash
            )));
        }
    }
    Ok(records)
}

fn used<F: Fn(&RunRecord) -> Option<f64>>(
    records: &[RunRecord],
    threshold: f64,
    get: F,
) -> Vec<f64> {
    records
        .iter()
        .filter(|r| !r.failed && r.boundary_mass.map_or(true, |b| b <= threshold))
        .filter_map(get)
        .collect()
}

fn acc_of(values: &[f64]) -> Accumulator {
    let mut a = Accumulator::new();
    for &v in values {
        a.push(v);
    }
    a
}

/// Run every enabled report over the loaded record sets. The returned flag
/// is true when all non-degenerate checks passed.
pub fn run_reports(
    cfg: &ExperimentConfig,
    sets: &[LoadedRecords],
    heights: &[(f64, Vec<Vec<f64>>)],
    out: &mut Vec<TestReport>,
) -> Result<bool> {
    let tol = &cfg.tolerance;
    let seed = cfg.ensemble.master_seed;
    let threshold = cfg.ensemble.boundary_mass_threshold;
    let model0 = cfg.model_for(cfg.domain.t_grid[0])?;
    let r0 = model0.r0();

    // per-horizon accumulators
    let mut per_t_logz: Vec<(f64, Accumulator)> = Vec::new();
    let mut per_t_logz_values: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut summaries = Vec::new();
    for set in sets {
        let logz = used(&set.records, threshold, |r| r.log_z_t);
        let o = used(&set.records, threshold, |r| r.o_t);
        let m = used(&set.records, threshold, |r| r.m_t);
        let summary =
            polymerlab_core::ensemble::summary_from_parts(set.t, cfg.beta, &set.records, threshold);
        per_t_logz.push((set.t, acc_of(&logz)));
        per_t_logz_values.push((set.t, logz));
        summaries.push((set.t, summary, o, m));
    }

    // free-energy rate
    let gamma = if per_t_logz.len() >= 3 {
        let g = estimate_gamma(&per_t_logz)?;
        let (lo, hi) = g.ci95();
        out.push(TestReport {
            name: "gamma_positive".into(),
            statistic: g.gamma_hat,
            threshold: 0.0,
            // at beta = 0 the rate is exactly zero by construction and the
            // positivity claim does not apply
            passed: (g.gamma_hat > 0.0 && lo > 0.0) || cfg.beta == 0.0,
            degenerate: cfg.beta == 0.0,
            sample_size: per_t_logz.len(),
            master_seed: seed,
            details: format!(
                "gamma_hat {:.6e}, se {:.2e}, CI95 [{lo:.6e}, {hi:.6e}], intercept {:.4e}",
                g.gamma_hat, g.se, g.intercept
            ),
        });
        Some(g)
    } else {
        None
    };

    // light-tail martingale normalization
    if let Some((_, summary, _, _)) = summaries.first() {
        out.push(ez_check(summary, r0, tol, seed));
    }

    if let Some(gamma) = &gamma {
        // overlap mean growth at the two largest horizons
        let mut by_t: Vec<&(
            f64,
            polymerlab_core::ensemble::EnsembleSummary,
            Vec<f64>,
            Vec<f64>,
        )> = summaries.iter().collect();
        by_t.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (_, summary, _, _) in by_t.iter().rev().take(2) {
            out.push(overlap_gamma_consistency(summary, gamma, seed));
        }

        // overlap CLT battery at the largest horizon
        if let Some((t, _, o, m)) = by_t.last() {
            out.extend(clt_report(o, *t, cfg.beta, gamma, tol, seed)?);
            let refs: Vec<&polymerlab_core::ensemble::EnsembleSummary> =
                summaries.iter().map(|(_, s, _, _)| s).collect();
            out.extend(m_checks(&refs, m, gamma, tol, seed)?);
        }
    }

    // superconcentration scaling
    if per_t_logz_values.len() >= 4 {
        let span = {
            let ts: Vec<f64> = per_t_logz_values.iter().map(|(t, _)| *t).collect();
            ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                / ts.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        if span >= 8.0 {
            out.extend(variance_scaling(&per_t_logz_values, tol, seed)?);
        }
    }

    // spatial bound suite over height snapshots
    if !heights.is_empty() {
        let grid = model0.domain.grid();
        let lags: Vec<usize> =
            (1..=((8.0 / cfg.domain.dx).round() as usize).min(grid.n / 2)).collect();
        out.extend(bound_suite(
            heights,
            grid,
            cfg.beta,
            r0,
            model0.kernel.l1,
            model0.kernel.linf,
            &cfg.recording.bks_m_grid,
            &lags,
            tol,
            seed,
        )?);
    }

    // derivative averages are a pure function of (seed, config); regenerate
    if cfg.recording.bks_realizations > 0 && cfg.domain.d == 1 {
        let bks_t = cfg
            .recording
            .bks_t
            .min(*cfg.domain.t_grid.last().unwrap_or(&cfg.recording.bks_t));
        let model = cfg.model_for(bks_t)?;
        let n_steps = model.domain.n_steps;
        let n_s = cfg.recording.bks_s_samples.min(n_steps);
        let s_steps: Vec<usize> = (0..n_s)
            .map(|i| ((i as f64 + 0.5) / n_s as f64 * n_steps as f64) as usize)
            .collect();
        let m_sites = (cfg.recording.bks_m_grid[0] / cfg.domain.dx).round() as usize;
        let streams: Vec<NoiseStream> = (0..cfg.recording.bks_realizations as u64)
            .map(|i| NoiseStream::new(seed, 1_000_000 + i))
            .collect();
        let q = bks_derivative_average(
            &model,
            &streams,
            &BksConfig {
                m_sites,
                s_steps,
                max_box_sites: cfg.recording.bks_max_box_sites,
            },
        )?;
        out.extend(bks_reports(
            &q,
            model.domain.horizon(),
            cfg.beta,
            model.kernel.l1,
            model.kernel.linf,
            tol,
            seed,
        ));
    }

    Ok(out.iter().all(|r| r.passed))
}

/// Load persisted height dumps for the snapshot times.
pub fn load_heights(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<(f64, Vec<Vec<f64>>)>> {
    let mut out = Vec::new();
    if !cfg.recording.heights {
        return Ok(out);
    }
    let t_max = cfg
        .domain
        .t_grid
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let hdir = heights_dir(dir, t_max);
    if !hdir.exists() {
        return Err(Error::io(format!(
            "height snapshots missing under {}",
            hdir.display()
        )));
    }
    let mut per_step: std::collections::BTreeMap<u64, Vec<Vec<f64>>> = Default::default();
    let mut entries: Vec<PathBuf> = fs::read_dir(&hdir)
        .map_err(|e| Error::io(format!("read {}: {e}", hdir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "bin"))
        .collect();
    entries.sort();
    for path in entries {
        let file = fs::File::open(&path)
            .map_err(|e| Error::io(format!("open {}: {e}", path.display())))?;
        let mut r = BufReader::new(file);
        loop {
            match read_field(&mut r) {
                Ok((_, _, step, _, values)) => per_step.entry(step).or_default().push(values),
                Err(_) => break,
            }
        }
    }
    for (step, fields) in per_step {
        out.push((step as f64 * cfg.domain.dt, fields));
    }
    Ok(out)
}

/// The analyze command body. Returns true when all checks passed.
pub fn run_analyze(
    cfg: &ExperimentConfig,
    dir: &Path,
    explicit_paths: &[PathBuf],
    allow_mismatch: bool,
) -> Result<bool> {
    let hash = cfg.hash();
    let paths: Vec<PathBuf> = if explicit_paths.is_empty() {
        cfg.domain
            .t_grid
            .iter()
            .map(|&t| records_path(dir, t))
            .collect()
    } else {
        explicit_paths.to_vec()
    };
    let mut sets = Vec::new();
    for path in &paths {
        let records = load_records(path, &hash, allow_mismatch)?;
        if records.is_empty() {
            return Err(Error::io(format!("{} holds no records", path.display())));
        }
        let t = records[0].t;
        sets.push(LoadedRecords { t, records });
    }
    sets.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());

    let heights = if cfg.recording.heights {
        load_heights(cfg, dir)?
    } else {
        Vec::new()
    };

    let mut reports = Vec::new();
    let all_passed = run_reports(cfg, &sets, &heights, &mut reports)?;

    for r in &reports {
        println!(
            "report {}: {}{} (stat {:.6e}, threshold {:.6e})",
            r.name,
            if r.passed { "pass" } else { "FAIL" },
            if r.degenerate { " [degenerate]" } else { "" },
            r.statistic,
            r.threshold
        );
    }

    // tidy histogram series of the standardized overlap at the largest T
    if let Some(set) = sets.last() {
        let o = used(&set.records, cfg.ensemble.boundary_mass_threshold, |r| {
            r.o_t
        });
        if o.len() >= 16 {
            let mean = o.iter().sum::<f64>() / o.len() as f64;
            let std: Vec<f64> = o.iter().map(|v| (v - mean) / set.t.sqrt()).collect();
            let lo = std.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = std.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let bins = 32usize;
            let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
            let mut counts = vec![0usize; bins];
            for v in &std {
                let b = (((v - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            let hpath = dir.join("histogram_o.csv");
            let hfile = fs::File::create(&hpath)
                .map_err(|e| Error::io(format!("create {}: {e}", hpath.display())))?;
            let mut hw = BufWriter::new(hfile);
            csv_preamble(
                &mut hw,
                cfg.ensemble.master_seed,
                &hash,
                TOOL_VERSION,
                "bin_lo,bin_hi,count,density",
            )?;
            for (b, &count) in counts.iter().enumerate() {
                let blo = lo + b as f64 * width;
                writeln!(
                    hw,
                    "{},{},{},{}",
                    polymerlab_core::export::fmt_float(blo),
                    polymerlab_core::export::fmt_float(blo + width),
                    count,
                    polymerlab_core::export::fmt_float(count as f64 / (o.len() as f64 * width))
                )?;
            }
            hw.flush()?;
        }
    }

    let rpath = dir.join("reports.csv");
    let rfile = fs::File::create(&rpath)
        .map_err(|e| Error::io(format!("create {}: {e}", rpath.display())))?;
    let mut rw = BufWriter::new(rfile);
    csv_preamble(
        &mut rw,
        cfg.ensemble.master_seed,
        &hash,
        TOOL_VERSION,
        REPORT_HEADER,
    )?;
    write_report_rows(&mut rw, &reports)?;
    rw.flush()?;
    Ok(all_passed)
}
