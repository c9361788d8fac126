//! The discrete model definition: grid geometry, time step, horizon,
//! inverse temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Discrete model parameters. Periodic boundary throughout; the physical
/// side length is `n * dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Spatial dimension, 1 or 2.
    pub d: usize,
    /// Sites per axis.
    pub n: usize,
    /// Grid spacing.
    pub dx: f64,
    /// Time step.
    pub dt: f64,
    /// Horizon steps; `T = n_steps * dt`.
    pub n_steps: usize,
    /// Inverse temperature, `>= 0`.
    pub beta: f64,
}

impl DomainSpec {
    pub fn new(d: usize, n: usize, dx: f64, dt: f64, n_steps: usize, beta: f64) -> Result<Self> {
        let spec = DomainSpec {
            d,
            n,
            dx,
            dt,
            n_steps,
            beta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 1 && self.d != 2 {
            return Err(Error::config(format!("d must be 1 or 2, got {}", self.d)));
        }
        if self.n < 1 {
            return Err(Error::config("n must be >= 1"));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return Err(Error::config(format!("dx must be > 0, got {}", self.dx)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::config(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        Grid::new(self.d, self.n, self.dx)
    }

    /// Total number of sites, `n^d`.
    #[inline]
    pub fn sites(&self) -> usize {
        self.grid().sites()
    }

    /// Volume element `dx^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.grid().cell_volume()
    }

    /// Physical side length `n * dx`.
    #[inline]
    pub fn side_length(&self) -> f64 {
        self.grid().side_length()
    }

    /// Time horizon `n_steps * dt`.
    #[inline]
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// A copy with a different horizon.
    pub fn with_n_steps(&self, n_steps: usize) -> Self {
        DomainSpec { n_steps, ..*self }
    }

    /// A copy with a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Self {
        DomainSpec { beta, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(DomainSpec::new(3, 8, 1.0, 0.1, 10, 1.0).is_err());
        assert!(DomainSpec::new(1, 0, 1.0, 0.1, 10, 1.0).is_err());
        assert!(DomainSpec::new(1, 8, -1.0, 0.1, 10, 1.0).is_err());
        assert!(DomainSpec::new(1, 8, 1.0, 0.0, 10, 1.0).is_err());
        assert!(DomainSpec::new(1, 8, 1.0, 0.1, 10, -0.5).is_err());
        assert!(DomainSpec::new(1, 8, 1.0, 0.1, 0, 0.0).is_ok());
    }

    #[test]
    fn derived_quantities() {
        let dom = DomainSpec::new(2, 16, 0.5, 0.01, 100, 1.0).unwrap();
        assert_eq!(dom.sites(), 256);
        assert!((dom.cell_volume() - 0.25).abs() < 1e-15);
        assert!((dom.side_length() - 8.0).abs() < 1e-15);
        assert!((dom.horizon() - 1.0).abs() < 1e-15);
    }
}
