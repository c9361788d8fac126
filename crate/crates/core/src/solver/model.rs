//! Bundled immutable model inputs shared by all passes of a run.

use crate::environment::{
    build_mollifier, covariance_from_mollifier, CovarianceTable, DomainSpec, Mollifier,
    MollifierShape,
};
use crate::error::Result;

use super::propagator::{build_propagator, HeatPropagator};

/// Debug hook for the verify suite: optionally flips the sign of the Ito
/// correction inside the tilt, which the single-site increment check
/// detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiltFault {
    #[default]
    None,
    FlipItoSign,
}

/// Immutable per-configuration inputs: domain, kernel, covariance,
/// propagator. Safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct PolymerModel {
    pub domain: DomainSpec,
    pub kernel: Mollifier,
    pub covariance: CovarianceTable,
    pub propagator: HeatPropagator,
    pub fault: TiltFault,
}

impl PolymerModel {
    pub fn new(
        domain: DomainSpec,
        shape: MollifierShape,
        radius: usize,
        amplitude: f64,
    ) -> Result<Self> {
        domain.validate()?;
        let kernel = build_mollifier(shape, radius, amplitude, &domain)?;
        Self::with_kernel(domain, kernel)
    }

    /// Build from an explicit kernel (used by diagnostics with the
    /// single-site point kernel).
    pub fn with_kernel(domain: DomainSpec, kernel: Mollifier) -> Result<Self> {
        let covariance = covariance_from_mollifier(&kernel, &domain)?;
        let propagator = build_propagator(&domain)?;
        Ok(PolymerModel {
            domain,
            kernel,
            covariance,
            propagator,
            fault: TiltFault::None,
        })
    }

    pub fn with_fault(mut self, fault: TiltFault) -> Self {
        self.fault = fault;
        self
    }

    /// `R(0)` of the configured kernel.
    #[inline]
    pub fn r0(&self) -> f64 {
        self.covariance.r0
    }
}
