//! The replica-overlap functional and its time series.
//!
//! `R(f) = dx^{2d} sum_{y,y'} f(y) f(y') R(y - y')` is evaluated spectrally
//! in `O(n^d log n)`; the quadratic-cost double sum is kept as an
//! independent route for verification.

use rustfft::num_complex::Complex;

use crate::environment::CovarianceTable;
use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::grid::Grid;
use crate::numeric::kahan_sum;

/// Precomputed spectral weights for the overlap functional.
#[derive(Debug, Clone)]
pub struct OverlapPlan {
    /// DFT of the covariance table (real and nonnegative since `R` is an
    /// autocorrelation).
    rhat: Vec<f64>,
    /// `dx^{2d} / n^d`.
    scale: f64,
    pub r0: f64,
    grid: Grid,
}

impl OverlapPlan {
    /// Build the plan, enforcing positive semidefiniteness of the table:
    /// every DFT coefficient must be `>= -1e-10`.
    pub fn new(cov: &CovarianceTable) -> Result<Self> {
        let grid = cov.grid();
        let mut spectral = Spectral::new(grid);
        spectral.forward_real(&cov.values);
        let mut rhat = Vec::with_capacity(grid.sites());
        for c in &spectral.buf {
            if c.im.abs() > 1e-10 || c.re < -1e-10 {
                return Err(Error::config(format!(
                    "covariance table is not positive semidefinite: mode value {c}"
                )));
            }
            rhat.push(c.re.max(0.0));
        }
        let scale = grid.cell_volume() * grid.cell_volume() / grid.sites() as f64;
        Ok(OverlapPlan {
            rhat,
            scale,
            r0: cov.r0,
            grid,
        })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Overlap value from an already-computed (unnormalized) DFT of the
    /// density, as produced by [`Spectral::forward_real`].
    pub fn from_spectrum(&self, spectrum: &[Complex<f64>]) -> f64 {
        debug_assert_eq!(spectrum.len(), self.rhat.len());
        self.scale
            * kahan_sum(
                spectrum
                    .iter()
                    .zip(&self.rhat)
                    .map(|(c, &r)| r * (c.re * c.re + c.im * c.im)),
            )
    }

    /// Overlap of a density, with its own transform.
    pub fn of_density(&self, f: &[f64], spectral: &mut Spectral) -> f64 {
        spectral.forward_real(f);
        self.from_spectrum(&spectral.buf)
    }
}

/// Spectral overlap functional of a normalized density.
pub fn overlap_functional(f: &[f64], cov: &CovarianceTable) -> Result<f64> {
    let grid = cov.grid();
    if f.len() != grid.sites() {
        return Err(Error::usage(
            "density length does not match covariance grid",
        ));
    }
    let mass = grid.cell_volume() * kahan_sum(f.iter().cloned());
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::usage(format!(
            "overlap_functional requires a normalized density, mass = {mass}"
        )));
    }
    let plan = OverlapPlan::new(cov)?;
    let mut spectral = Spectral::new(grid);
    Ok(plan.of_density(f, &mut spectral))
}

/// Quadratic-cost double sum `dx^{2d} sum_{y,y'} f(y) f(y') R(y-y')`.
/// Independent verification route for the spectral path.
pub fn overlap_functional_direct(f: &[f64], cov: &CovarianceTable) -> Result<f64> {
    let grid = cov.grid();
    if f.len() != grid.sites() {
        return Err(Error::usage(
            "density length does not match covariance grid",
        ));
    }
    let dv2 = grid.cell_volume() * grid.cell_volume();
    let n = grid.n;
    let mut acc = 0.0;
    match grid.d {
        1 => {
            for (y, &fy) in f.iter().enumerate() {
                if fy == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for (yp, &fyp) in f.iter().enumerate() {
                    let k = (y + n - yp) % n;
                    row += fyp * cov.values[k];
                }
                acc += fy * row;
            }
        }
        2 => {
            for (y, &fy) in f.iter().enumerate() {
                if fy == 0.0 {
                    continue;
                }
                let (a0, a1) = (y / n, y % n);
                let mut row = 0.0;
                for (yp, &fyp) in f.iter().enumerate() {
                    let (b0, b1) = (yp / n, yp % n);
                    let k0 = (a0 + n - b0) % n;
                    let k1 = (a1 + n - b1) % n;
                    row += fyp * cov.values[k0 * n + k1];
                }
                acc += fy * row;
            }
        }
        _ => unreachable!(),
    }
    Ok(dv2 * acc)
}

/// Per-step overlap values and their left-endpoint partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSeries {
    /// `R(rho_i)` for `i = 0 .. n_steps`.
    pub values: Vec<f64>,
    /// `O_{t_i} = dt * sum_{j <= i} R(rho_j)`.
    pub o_partial: Vec<f64>,
    /// `beta^2 * O_{t_i}`, identical to the quadratic-variation series.
    pub qv: Vec<f64>,
}

impl OverlapSeries {
    /// Assemble from recorded per-step values (left-endpoint quadrature).
    pub fn assemble(values: Vec<f64>, dt: f64, beta: f64) -> Self {
        let mut o_partial = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for &v in &values {
            acc += dt * v;
            o_partial.push(acc);
        }
        let qv = o_partial.iter().map(|&o| beta * beta * o).collect();
        OverlapSeries {
            values,
            o_partial,
            qv,
        }
    }

    /// `O_T`, the final partial sum (0 for an empty horizon).
    pub fn total(&self) -> f64 {
        self.o_partial.last().copied().unwrap_or(0.0)
    }
}

/// Argmax site of a density with row-major tie-breaking, and the profile
/// re-centered at the mode by a circular shift.
pub fn endpoint_mode(rho: &[f64], grid: Grid) -> (usize, Vec<f64>) {
    let mut mode = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in rho.iter().enumerate() {
        if v > best {
            best = v;
            mode = i;
        }
    }
    let n = grid.n;
    let mut centered = vec![0.0; rho.len()];
    match grid.d {
        1 => {
            for (j, c) in centered.iter_mut().enumerate() {
                *c = rho[(j + mode) % n];
            }
        }
        2 => {
            let (m0, m1) = (mode / n, mode % n);
            for j0 in 0..n {
                for j1 in 0..n {
                    centered[j0 * n + j1] = rho[((j0 + m0) % n) * n + (j1 + m1) % n];
                }
            }
        }
        _ => unreachable!(),
    }
    (mode, centered)
}
