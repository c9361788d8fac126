//! Height-field statistics: box averages, spatial increment moments, and the
//! gradient/overlap identity terms.

use crate::environment::DomainSpec;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numeric::kahan_sum;
use crate::solver::InitialData;

use super::recorder::Snapshot;

/// Reconstruct `h(t, x) = log u(t, x)` from a stored snapshot.
///
/// For the constant start the physical field is
/// `density * exp(log_mass) * L^d`, so `h = log density + log_mass + d log L`.
pub fn height_from_snapshot(snap: &Snapshot, domain: &DomainSpec, init: InitialData) -> Vec<f64> {
    let offset = match init {
        InitialData::ConstantOne => snap.log_mass + (domain.d as f64) * domain.side_length().ln(),
        InitialData::DeltaAtOrigin => snap.log_mass,
    };
    snap.density.iter().map(|&v| v.ln() + offset).collect()
}

/// Exact arithmetic mean of `h` over the centered box of half-width
/// `m_sites` (box has `2*m_sites + 1` sites per axis).
pub fn local_average(h: &[f64], grid: Grid, m_sites: usize) -> Result<f64> {
    if 2 * m_sites + 1 > grid.n {
        return Err(Error::usage(format!(
            "box half-width {m_sites} exceeds grid of {} sites per axis",
            grid.n
        )));
    }
    if h.len() != grid.sites() {
        return Err(Error::usage("field length does not match grid"));
    }
    let m = m_sites as i64;
    let mut acc = Vec::with_capacity((2 * m_sites + 1).pow(grid.d as u32));
    match grid.d {
        1 => {
            for j in -m..=m {
                acc.push(h[grid.wrap_axis(j)]);
            }
        }
        2 => {
            for a in -m..=m {
                for b in -m..=m {
                    acc.push(h[grid.wrap_axis(a) * grid.n + grid.wrap_axis(b)]);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(kahan_sum(acc.iter().cloned()) / acc.len() as f64)
}

/// Site-pooled second moment of `h(x) - h(x + k)` per lag, with the
/// ensemble standard error of the pooled estimate and the ratio against the
/// quadratic bound `beta^2 R(0) (k dx)^2`.
#[derive(Debug, Clone)]
pub struct IncrementMoments {
    pub lags: Vec<usize>,
    /// Ensemble mean of the per-realization site-pooled mean square.
    pub moments: Vec<f64>,
    /// Standard error over realizations.
    pub se: Vec<f64>,
    /// `moment / (beta^2 R(0) (k dx)^2)`; zero lag reports 0.
    pub bound_ratio: Vec<f64>,
}

/// Per-realization site pooling keeps the estimator unbiased while the
/// ensemble spread across realizations gives the standard error.
pub fn increment_moments(
    heights: &[Vec<f64>],
    grid: Grid,
    lags: &[usize],
    beta: f64,
    r0: f64,
) -> Result<IncrementMoments> {
    if heights.len() < 2 {
        return Err(Error::usage("increment moments need >= 2 realizations"));
    }
    let n_real = heights.len() as f64;
    let mut moments = Vec::with_capacity(lags.len());
    let mut se = Vec::with_capacity(lags.len());
    let mut bound_ratio = Vec::with_capacity(lags.len());
    for &k in lags {
        if k >= grid.n {
            return Err(Error::usage(format!("lag {k} exceeds grid")));
        }
        let mut pooled = Vec::with_capacity(heights.len());
        for h in heights {
            if h.len() != grid.sites() {
                return Err(Error::usage("field length does not match grid"));
            }
            let mut acc = 0.0;
            match grid.d {
                1 => {
                    for x in 0..grid.n {
                        let d = h[x] - h[(x + k) % grid.n];
                        acc += d * d;
                    }
                    acc /= grid.n as f64;
                }
                2 => {
                    // pool both axis directions
                    for a in 0..grid.n {
                        for b in 0..grid.n {
                            let d0 = h[a * grid.n + b] - h[((a + k) % grid.n) * grid.n + b];
                            let d1 = h[a * grid.n + b] - h[a * grid.n + (b + k) % grid.n];
                            acc += 0.5 * (d0 * d0 + d1 * d1);
                        }
                    }
                    acc /= grid.sites() as f64;
                }
                _ => unreachable!(),
            }
            pooled.push(acc);
        }
        let mean = kahan_sum(pooled.iter().cloned()) / n_real;
        let var = kahan_sum(pooled.iter().map(|&v| (v - mean) * (v - mean))) / (n_real - 1.0);
        moments.push(mean);
        se.push((var / n_real).sqrt());
        let denom = beta * beta * r0 * (k as f64 * grid.dx).powi(2);
        bound_ratio.push(if k == 0 { 0.0 } else { mean / denom });
    }
    Ok(IncrementMoments {
        lags: lags.to_vec(),
        moments,
        se,
        bound_ratio,
    })
}

/// Ensemble estimates of the gradient/overlap identity terms at one time:
/// `f_hat` is the mean spatial average of `|grad h|^2` (central differences,
/// periodic wrap), `g_hat` the mean overlap of the endpoint density, and
/// `defect = f_hat - beta^2 (R(0) - g_hat)`, exact only in the continuum.
#[derive(Debug, Clone)]
pub struct GradientOverlapReport {
    pub f_hat: f64,
    pub f_se: f64,
    pub g_hat: f64,
    pub g_se: f64,
    pub defect: f64,
    /// Combined standard error of the defect.
    pub defect_se: f64,
}

/// Mean square gradient of one height field (spatial average).
pub fn mean_square_gradient(h: &[f64], grid: Grid) -> f64 {
    let inv2dx = 1.0 / (2.0 * grid.dx);
    let mut acc = 0.0;
    match grid.d {
        1 => {
            let n = grid.n;
            for x in 0..n {
                let g = (h[(x + 1) % n] - h[(x + n - 1) % n]) * inv2dx;
                acc += g * g;
            }
        }
        2 => {
            let n = grid.n;
            for a in 0..n {
                for b in 0..n {
                    let g0 = (h[((a + 1) % n) * n + b] - h[((a + n - 1) % n) * n + b]) * inv2dx;
                    let g1 = (h[a * n + (b + 1) % n] - h[a * n + (b + n - 1) % n]) * inv2dx;
                    acc += g0 * g0 + g1 * g1;
                }
            }
        }
        _ => unreachable!(),
    }
    acc / grid.sites() as f64
}

/// Assemble the identity report from matched-time ensembles: height fields
/// (constant start) and overlap values `R(rho_t)` (delta start).
pub fn gradient_overlap_identity(
    heights: &[Vec<f64>],
    overlap_values: &[f64],
    grid: Grid,
    beta: f64,
    r0: f64,
) -> Result<GradientOverlapReport> {
    if heights.is_empty() || overlap_values.is_empty() {
        return Err(Error::usage("identity report needs nonempty ensembles"));
    }
    let nf = heights.len() as f64;
    let f_vals: Vec<f64> = heights
        .iter()
        .map(|h| mean_square_gradient(h, grid))
        .collect();
    let f_hat = kahan_sum(f_vals.iter().cloned()) / nf;
    let f_var = if heights.len() > 1 {
        kahan_sum(f_vals.iter().map(|&v| (v - f_hat) * (v - f_hat))) / (nf - 1.0)
    } else {
        0.0
    };
    let f_se = (f_var / nf).sqrt();

    let ng = overlap_values.len() as f64;
    let g_hat = kahan_sum(overlap_values.iter().cloned()) / ng;
    let g_var = if overlap_values.len() > 1 {
        kahan_sum(overlap_values.iter().map(|&v| (v - g_hat) * (v - g_hat))) / (ng - 1.0)
    } else {
        0.0
    };
    let g_se = (g_var / ng).sqrt();

    let defect = f_hat - beta * beta * (r0 - g_hat);
    let defect_se = (f_se * f_se + beta.powi(4) * g_se * g_se).sqrt();
    Ok(GradientOverlapReport {
        f_hat,
        f_se,
        g_hat,
        g_se,
        defect,
        defect_se,
    })
}
