//! Forward Feynman-Kac recursion: diffuse, tilt, renormalize.
//!
//! Scheme per step `i`: apply the exact spectral heat semigroup to the
//! normalized density, tilt pointwise by
//! `exp(beta * xi_i * dt - beta^2 R(0) dt / 2)`, renormalize, and add the
//! log of the tilted-to-diffused mass ratio to `log_mass`. The Ito
//! correction makes the tilt mean-one per site, so `exp(log_mass)` is an
//! exact discrete martingale for the delta start; the mass ratio keeps the
//! beta = 0 increment exactly zero.
//!
//! The spectral semigroup band-limits its input, so a fresh delta transiently
//! carries small negative side lobes until `t ~ dx^2`; they are part of the
//! exact discrete flow and are not clamped here. Probability marginals are
//! projected back to nonnegative values where they are formed.

use rustfft::num_complex::Complex;

use crate::environment::noise::{mollify_values_into, sample_noise_values_into};
use crate::environment::{DomainSpec, NoiseStream, XiSlice};
use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::numeric::kahan_sum;

use super::field::{FieldState, InitialData};
use super::model::{PolymerModel, TiltFault};
use super::propagator::HeatPropagator;

/// Hooks invoked by the forward runner. The default implementations do
/// nothing, so observers implement only what they record.
pub trait StepObserver {
    /// Initial state, before any step.
    fn on_init(&mut self, _state: &FieldState) {}

    /// Start of step `i`: the left-endpoint density and its DFT (the
    /// spectrum the heat step is about to use).
    fn on_step_start(&mut self, _step: usize, _state: &FieldState, _spectrum: &[Complex<f64>]) {}

    /// After diffusion, before the tilt: the predictable density and the
    /// mollified slice that will tilt it.
    fn on_diffused(&mut self, _step: usize, _diffused: &[f64], _xi: &[f64]) {}

    /// End of step: the renormalized post-tilt state.
    fn on_step_end(&mut self, _state: &FieldState) {}
}

/// Observer that records nothing.
pub struct NullObserver;

impl StepObserver for NullObserver {}

/// One diffuse-tilt-renormalize step on `state`, in place.
#[allow(clippy::too_many_arguments)]
fn step_with_observer<O: StepObserver>(
    state: &mut FieldState,
    xi: &[f64],
    prop: &HeatPropagator,
    r0: f64,
    domain: &DomainSpec,
    fault: TiltFault,
    spectral: &mut Spectral,
    observer: &mut O,
) -> Result<()> {
    let step = state.step;

    // Diffuse, exposing the left-endpoint spectrum before the multiplier.
    spectral.forward_real(&state.density);
    observer.on_step_start(step, state, &spectral.buf);
    for (b, &m) in spectral.buf.iter_mut().zip(&prop.multipliers) {
        *b *= m;
    }
    spectral.inverse_to_real(&mut state.density);
    observer.on_diffused(step, &state.density, xi);
    let diffused_mass = domain.cell_volume() * kahan_sum(state.density.iter().cloned());

    // Tilt with the Ito correction, then renormalize.
    let beta = domain.beta;
    let correction = match fault {
        TiltFault::None => -0.5 * beta * beta * r0 * domain.dt,
        TiltFault::FlipItoSign => 0.5 * beta * beta * r0 * domain.dt,
    };
    for (v, &x) in state.density.iter_mut().zip(xi) {
        *v *= (beta * x * domain.dt + correction).exp();
    }
    let mass = domain.cell_volume() * kahan_sum(state.density.iter().cloned());
    if !mass.is_finite() || mass <= 0.0 || !(diffused_mass > 0.0) {
        return Err(Error::numerical(step, format!("tilted mass = {mass}")));
    }
    let inv = 1.0 / mass;
    for v in state.density.iter_mut() {
        *v *= inv;
    }
    // Diffusion is exactly mass-preserving, so any drift in diffused_mass is
    // FFT roundoff; dividing it out keeps the ratio exactly 1 when the tilt
    // is the identity.
    state.log_mass += (mass / diffused_mass).ln();
    if !state.log_mass.is_finite() {
        return Err(Error::numerical(step, "log_mass diverged"));
    }
    state.step = step + 1;
    observer.on_step_end(state);
    Ok(())
}

/// One forward step with an explicit mollified slice (allocating form).
///
/// `r0` is the kernel autocorrelation at zero, entering through the Ito
/// correction `-beta^2 R(0) dt / 2`.
pub fn forward_step(
    state: &FieldState,
    xi: &XiSlice,
    prop: &HeatPropagator,
    r0: f64,
    domain: &DomainSpec,
) -> Result<FieldState> {
    if xi.step != state.step {
        return Err(Error::usage(format!(
            "xi slice step {} does not match state step {}",
            xi.step, state.step
        )));
    }
    if xi.values.len() != state.density.len() {
        return Err(Error::usage("xi slice length does not match field"));
    }
    let mut spectral = Spectral::new(domain.grid());
    let mut next = state.clone();
    step_with_observer(
        &mut next,
        &xi.values,
        prop,
        r0,
        domain,
        TiltFault::None,
        &mut spectral,
        &mut NullObserver,
    )?;
    Ok(next)
}

/// Run the forward recursion over the full horizon, invoking the observer at
/// each stage. Returns the final state.
pub fn run_forward<O: StepObserver>(
    model: &PolymerModel,
    stream: NoiseStream,
    init: InitialData,
    observer: &mut O,
) -> Result<FieldState> {
    let domain = &model.domain;
    let mut spectral = Spectral::new(domain.grid());
    let mut state = FieldState::initial(init, domain);
    let mut eta = vec![0.0; domain.sites()];
    let mut xi = vec![0.0; domain.sites()];
    observer.on_init(&state);
    for step in 0..domain.n_steps {
        sample_noise_values_into(stream, step, domain, &mut eta);
        mollify_values_into(&eta, &model.kernel, domain, &mut xi)?;
        step_with_observer(
            &mut state,
            &xi,
            &model.propagator,
            model.r0(),
            domain,
            model.fault,
            &mut spectral,
            observer,
        )?;
    }
    Ok(state)
}
