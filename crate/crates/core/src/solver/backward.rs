//! Time-reversed Feynman-Kac recursion and Gibbs path marginals.
//!
//! The backward weight at step `i` is `w_i = P (G_i w_{i+1})`, the adjoint of
//! the forward update: the forward state at step `i` owns the tilts of
//! slices `0..i`, the backward state owns slices `i..n_steps`, so no slice
//! is counted twice and none is dropped. The `dx^d`-weighted bracket
//! `<u_i, w_i>` (with log-masses reattached) is step-invariant.
//!
//! The environment is regenerated from the seekable stream rather than
//! stored; the caller is responsible for pairing a backward pass with the
//! forward pass on the same stream (a mismatch is not detectable here).

use crate::environment::noise::{mollify_values_into, sample_noise_values_into};
use crate::environment::NoiseStream;
use crate::error::{Error, Result};
use crate::fft::Spectral;
use crate::numeric::{kahan_dot, kahan_sum};

use super::field::{BackwardState, FieldState, Terminal};
use super::model::{PolymerModel, TiltFault};

/// Which backward states to retain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeepPolicy {
    /// Every step in `[down_to, n_steps]`. Memory `O(n_steps * n^d)`.
    All,
    /// Only the listed steps (any order, deduplicated internally).
    AtSteps(Vec<usize>),
    /// Only the final (step = `down_to`) state.
    FinalOnly,
}

/// Result of a backward pass.
#[derive(Debug, Clone)]
pub struct BackwardTrajectory {
    /// Retained states, ascending in step.
    pub kept: Vec<BackwardState>,
    pub down_to: usize,
    pub terminal: Terminal,
}

impl BackwardTrajectory {
    /// The retained state at `step`, if kept.
    pub fn at_step(&self, step: usize) -> Option<&BackwardState> {
        self.kept
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.kept[i])
    }
}

/// Run the backward recursion from the horizon down to `down_to`.
pub fn run_backward(
    model: &PolymerModel,
    stream: NoiseStream,
    terminal: Terminal,
    down_to: usize,
    keep: KeepPolicy,
) -> Result<BackwardTrajectory> {
    let domain = &model.domain;
    let n_steps = domain.n_steps;
    if down_to > n_steps {
        return Err(Error::usage(format!(
            "down_to {down_to} exceeds horizon {n_steps}"
        )));
    }
    if let Terminal::DeltaAt(site) = terminal {
        if site >= domain.sites() {
            return Err(Error::usage(format!("terminal site {site} out of grid")));
        }
    }
    let mut keep_steps: Vec<usize> = match &keep {
        KeepPolicy::All => (down_to..=n_steps).collect(),
        KeepPolicy::AtSteps(steps) => {
            let mut s: Vec<usize> = steps
                .iter()
                .cloned()
                .filter(|&s| s >= down_to && s <= n_steps)
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        }
        KeepPolicy::FinalOnly => vec![down_to],
    };

    let mut spectral = Spectral::new(domain.grid());
    let mut state = BackwardState::terminal(terminal, domain, n_steps);
    let mut eta = vec![0.0; domain.sites()];
    let mut xi = vec![0.0; domain.sites()];
    let mut kept: Vec<BackwardState> = Vec::with_capacity(keep_steps.len());

    if keep_steps.last() == Some(&n_steps) {
        kept.push(state.clone());
        keep_steps.pop();
    }

    let beta = domain.beta;
    for step in (down_to..n_steps).rev() {
        sample_noise_values_into(stream, step, domain, &mut eta);
        mollify_values_into(&eta, &model.kernel, domain, &mut xi)?;

        // Tilt with slice `step`, renormalize, then diffuse (the adjoint of
        // the forward update order).
        let pre_mass = domain.cell_volume() * kahan_sum(state.weights.iter().cloned());
        let correction = match model.fault {
            TiltFault::None => -0.5 * beta * beta * model.r0() * domain.dt,
            TiltFault::FlipItoSign => 0.5 * beta * beta * model.r0() * domain.dt,
        };
        for (w, &x) in state.weights.iter_mut().zip(&xi) {
            *w *= (beta * x * domain.dt + correction).exp();
        }
        let mass = domain.cell_volume() * kahan_sum(state.weights.iter().cloned());
        if !mass.is_finite() || mass <= 0.0 || !(pre_mass > 0.0) {
            return Err(Error::numerical(step, format!("backward mass = {mass}")));
        }
        let inv = 1.0 / mass;
        for w in state.weights.iter_mut() {
            *w *= inv;
        }
        // As in the forward pass, the pre-tilt mass drift is FFT roundoff
        // from the previous diffusion; the ratio keeps beta = 0 increments
        // exactly zero.
        state.log_mass += (mass / pre_mass).ln();

        spectral.forward_real(&state.weights);
        for (b, &m) in spectral.buf.iter_mut().zip(&model.propagator.multipliers) {
            *b *= m;
        }
        spectral.inverse_to_real(&mut state.weights);
        state.step = step;

        if keep_steps.last() == Some(&step) {
            kept.push(state.clone());
            keep_steps.pop();
        }
    }
    kept.reverse();
    Ok(BackwardTrajectory {
        kept,
        down_to,
        terminal,
    })
}

/// Normalized Gibbs path marginal at a step: `mu_i` proportional to
/// `forward density * backward weight`.
pub fn gibbs_marginal(
    fwd: &FieldState,
    bwd: &BackwardState,
    model: &PolymerModel,
) -> Result<Vec<f64>> {
    if fwd.step != bwd.step {
        return Err(Error::usage(format!(
            "gibbs_marginal step mismatch: forward {} vs backward {}",
            fwd.step, bwd.step
        )));
    }
    if fwd.density.len() != bwd.weights.len() {
        return Err(Error::usage("field shapes differ"));
    }
    let mut mu: Vec<f64> = fwd
        .density
        .iter()
        .zip(&bwd.weights)
        .map(|(a, b)| a * b)
        .collect();
    let mass = model.domain.cell_volume() * kahan_sum(mu.iter().cloned());
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::numerical(
            fwd.step,
            format!("gibbs marginal mass = {mass}"),
        ));
    }
    let inv = 1.0 / mass;
    for v in mu.iter_mut() {
        *v *= inv;
    }
    Ok(mu)
}

/// Log of the forward-backward bracket with log-masses reattached:
/// `log(dx^d sum_x fwd(x) bwd(x)) + log_mass_fwd + log_mass_bwd`.
/// Step-invariant along a paired trajectory.
pub fn pairing_bracket(fwd: &FieldState, bwd: &BackwardState, model: &PolymerModel) -> f64 {
    let dot = model.domain.cell_volume() * kahan_dot(&fwd.density, &bwd.weights);
    dot.ln() + fwd.log_mass + bwd.log_mass
}
