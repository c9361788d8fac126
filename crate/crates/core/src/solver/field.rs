//! Log-domain field states for the forward and backward passes.

use serde::{Deserialize, Serialize};

use crate::environment::DomainSpec;
use crate::error::{Error, Result};
use crate::numeric::kahan_sum;

/// Initial condition for the forward recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    /// Mass `1/dx^d` at the origin site; `log_mass` then tracks `log Z_t`.
    DeltaAtOrigin,
    /// `u(0, x) = 1`; `log_mass` then tracks the log of the spatially
    /// averaged field.
    ConstantOne,
}

/// Terminal condition for the backward recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    ConstantOne,
    DeltaAt(usize),
}

/// Normalized density plus accumulated log-mass at a time step.
///
/// The physical field is `density * exp(log_mass) * K` with `K` fixed by the
/// initial condition (`K = 1` for the delta start, `K = L^d` for the
/// constant start); all observables in use are `K`-invariant or reattach it
/// explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub density: Vec<f64>,
    pub log_mass: f64,
    pub step: usize,
}

impl FieldState {
    pub fn initial(init: InitialData, domain: &DomainSpec) -> Self {
        let sites = domain.sites();
        let mut density = vec![0.0; sites];
        match init {
            InitialData::DeltaAtOrigin => {
                density[0] = 1.0 / domain.cell_volume();
            }
            InitialData::ConstantOne => {
                let inv = 1.0 / domain.side_length().powi(domain.d as i32);
                density.iter_mut().for_each(|v| *v = inv);
            }
        }
        FieldState {
            density,
            log_mass: 0.0,
            step: 0,
        }
    }

    /// `dx^d`-weighted total mass of the stored density (should be 1).
    pub fn mass(&self, domain: &DomainSpec) -> f64 {
        domain.cell_volume() * kahan_sum(self.density.iter().cloned())
    }

    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        if self.density.len() != domain.sites() {
            return Err(Error::usage("field length does not match grid"));
        }
        if !self.log_mass.is_finite() {
            return Err(Error::numerical(self.step, "log_mass is not finite"));
        }
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        for &v in &self.density {
            if !v.is_finite() {
                return Err(Error::numerical(self.step, "density entry invalid"));
            }
            // Small negative side lobes are the band-limit transient of
            // delta-like data under the spectral semigroup; reject anything
            // beyond that scale.
            if v < -0.1 * peak {
                return Err(Error::numerical(self.step, "density entry negative"));
            }
        }
        let mass = self.mass(domain);
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::numerical(
                self.step,
                format!("density mass {mass} deviates from 1"),
            ));
        }
        Ok(())
    }
}

/// Backward (point-to-line conditional partition) weights, normalized with
/// their own log-mass.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardState {
    pub weights: Vec<f64>,
    pub log_mass: f64,
    pub step: usize,
}

impl BackwardState {
    pub fn terminal(terminal: Terminal, domain: &DomainSpec, n_steps: usize) -> Self {
        let sites = domain.sites();
        let mut weights = vec![0.0; sites];
        match terminal {
            Terminal::ConstantOne => {
                let inv = 1.0 / domain.side_length().powi(domain.d as i32);
                weights.iter_mut().for_each(|v| *v = inv);
            }
            Terminal::DeltaAt(site) => {
                weights[site] = 1.0 / domain.cell_volume();
            }
        }
        BackwardState {
            weights,
            log_mass: 0.0,
            step: n_steps,
        }
    }
}
