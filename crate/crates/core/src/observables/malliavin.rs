//! Malliavin derivative field of the height function at a target `(T, x0)`.
//!
//! `D(s, y) = beta * dx^d * sum_z mu~_s(z) phi(z - y)`, where `mu~_s` is the
//! normalized time-`s` path marginal of the polymer rooted at `(T, x0)`:
//! forward constant-start field times backward delta-terminal weights. The
//! derivative of slice `i` is evaluated at the marginal of step `i + 1`, the
//! path position the slice's tilt touches.
//!
//! Exact identities carried by construction: per-slice mass
//! `dx^d sum_y D = beta ||phi||_1` and entrywise bounds
//! `0 <= D <= beta ||phi||_inf`.

use crate::environment::noise::mollify_values_into;
use crate::environment::NoiseStream;
use crate::error::{Error, Result};
use crate::numeric::kahan_sum;
use crate::solver::{
    run_backward, run_forward, FieldState, InitialData, KeepPolicy, PolymerModel, StepObserver,
    Terminal,
};

/// Derivative rows `D(s, y)` over a set of slice indices.
#[derive(Debug, Clone)]
pub struct MalliavinField {
    /// Slice indices, ascending.
    pub s_steps: Vec<usize>,
    /// One full grid row per slice index, concatenated.
    pub values: Vec<f64>,
    /// `dx^d sum_y D(s, y)` per slice.
    pub per_s_mass: Vec<f64>,
    /// `beta ||phi||_1`.
    pub mass_identity: f64,
    /// `beta ||phi||_inf`.
    pub upper_bound: f64,
    pub target_site: usize,
    sites: usize,
}

impl MalliavinField {
    pub fn row(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.sites..(idx + 1) * self.sites]
    }

    pub fn rows(&self) -> usize {
        self.s_steps.len()
    }
}

struct MarginalCapture {
    wanted: Vec<usize>,
    kept: Vec<FieldState>,
}

impl StepObserver for MarginalCapture {
    fn on_step_end(&mut self, state: &FieldState) {
        if self.wanted.binary_search(&state.step).is_ok() {
            self.kept.push(state.clone());
        }
    }
    fn on_init(&mut self, state: &FieldState) {
        if self.wanted.binary_search(&state.step).is_ok() {
            self.kept.push(state.clone());
        }
    }
}

/// The normalized path marginal from a forward/backward pair.
///
/// Delta-like data band-limited by the spectral flow can ring slightly
/// negative near the pinning time. With `project` set the product is
/// projected onto nonnegative values before normalizing (probability-vector
/// semantics, required for the exact derivative bounds); without it the
/// marginal reproduces the forward density bitwise when the backward weight
/// is constant.
pub(crate) fn path_marginal(
    fwd: &FieldState,
    bwd_weights: &[f64],
    cell_volume: f64,
    step: usize,
    project: bool,
) -> Result<Vec<f64>> {
    let mut mu: Vec<f64> = fwd
        .density
        .iter()
        .zip(bwd_weights)
        .map(|(a, b)| if project { (a * b).max(0.0) } else { a * b })
        .collect();
    let mass = cell_volume * kahan_sum(mu.iter().cloned());
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::numerical(step, format!("marginal mass = {mass}")));
    }
    let inv = 1.0 / mass;
    mu.iter_mut().for_each(|v| *v *= inv);
    Ok(mu)
}

/// Compute the Malliavin derivative field for the target `(T, x0)` over the
/// given slice indices (`None` = all slices). Runs one constant-start
/// forward pass and one delta-terminal backward pass on the same stream.
pub fn malliavin_field(
    model: &PolymerModel,
    stream: NoiseStream,
    target_site: usize,
    s_steps: Option<&[usize]>,
) -> Result<MalliavinField> {
    let domain = &model.domain;
    let n_steps = domain.n_steps;
    if target_site >= domain.sites() {
        return Err(Error::usage(format!(
            "target site {target_site} out of grid"
        )));
    }
    let mut slices: Vec<usize> = match s_steps {
        Some(s) => {
            let mut v: Vec<usize> = s.to_vec();
            v.sort_unstable();
            v.dedup();
            if v.iter().any(|&i| i >= n_steps) {
                return Err(Error::usage("slice index out of horizon"));
            }
            v
        }
        None => (0..n_steps).collect(),
    };
    if slices.is_empty() {
        return Err(Error::usage("no slice indices requested"));
    }

    // Slice i's tilt touches the path position at step i + 1.
    let marginal_steps: Vec<usize> = slices.iter().map(|&i| i + 1).collect();
    let bwd = run_backward(
        model,
        stream,
        Terminal::DeltaAt(target_site),
        *marginal_steps.first().unwrap(),
        KeepPolicy::AtSteps(marginal_steps.clone()),
    )?;
    let mut capture = MarginalCapture {
        wanted: marginal_steps.clone(),
        kept: Vec::with_capacity(marginal_steps.len()),
    };
    run_forward(model, stream, InitialData::ConstantOne, &mut capture)?;

    let sites = domain.sites();
    let beta = domain.beta;
    let dv = domain.cell_volume();
    let mut values = vec![0.0; slices.len() * sites];
    let mut per_s_mass = Vec::with_capacity(slices.len());
    for (row, (&slice, fwd)) in slices.iter().zip(&capture.kept).enumerate() {
        let step = slice + 1;
        debug_assert_eq!(fwd.step, step);
        let w = bwd
            .at_step(step)
            .ok_or_else(|| Error::usage("backward state missing"))?;
        let mu = path_marginal(fwd, &w.weights, dv, step, true)?;
        let out = &mut values[row * sites..(row + 1) * sites];
        // D(s, .) = beta * dx^d * (phi conv mu); phi is even, so the
        // correlation in the definition equals the convolution.
        mollify_values_into(&mu, &model.kernel, domain, out)?;
        out.iter_mut().for_each(|v| *v *= beta);
        per_s_mass.push(dv * kahan_sum(out.iter().cloned()));
    }
    slices.shrink_to_fit();
    Ok(MalliavinField {
        s_steps: slices,
        values,
        per_s_mass,
        mass_identity: beta * model.kernel.l1,
        upper_bound: beta * model.kernel.linf,
        target_site,
        sites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{DomainSpec, MollifierShape};

    fn model(beta: f64) -> PolymerModel {
        let domain = DomainSpec::new(1, 32, 0.5, 0.02, 20, beta).unwrap();
        PolymerModel::new(domain, MollifierShape::Triangular, 1, 1.0).unwrap()
    }

    #[test]
    fn mass_identity_and_bounds_hold_exactly() {
        let m = model(1.1);
        let field = malliavin_field(&m, NoiseStream::new(4, 0), 7, None).unwrap();
        assert_eq!(field.rows(), 20);
        for (i, &mass) in field.per_s_mass.iter().enumerate() {
            assert!(
                (mass - field.mass_identity).abs() < 1e-10,
                "slice {i}: mass {mass} vs {}",
                field.mass_identity
            );
        }
        for &v in &field.values {
            assert!(v >= 0.0);
            assert!(v <= field.upper_bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn final_slice_reduces_to_kernel_at_target() {
        let m = model(0.8);
        let target = 13;
        let field = malliavin_field(&m, NoiseStream::new(4, 1), target, Some(&[19])).unwrap();
        // mu at step 20 is the delta at the target, so D = beta * phi(x0 - y)
        let row = field.row(0);
        let beta = m.domain.beta;
        for (y, &v) in row.iter().enumerate() {
            let off = y as i64 - target as i64;
            let expect = beta * m.kernel.at_offset(&[off]);
            assert!((v - expect).abs() < 1e-12, "y={y}: {v} vs {expect}");
        }
    }

    #[test]
    fn beta_zero_field_vanishes() {
        let m = model(0.0);
        let field = malliavin_field(&m, NoiseStream::new(4, 2), 0, Some(&[0, 5, 19])).unwrap();
        assert!(field.values.iter().all(|&v| v == 0.0));
        assert_eq!(field.mass_identity, 0.0);
    }

    #[test]
    fn rejects_bad_targets_and_slices() {
        let m = model(1.0);
        assert!(malliavin_field(&m, NoiseStream::new(0, 0), 999, None).is_err());
        assert!(malliavin_field(&m, NoiseStream::new(0, 0), 0, Some(&[20])).is_err());
        assert!(malliavin_field(&m, NoiseStream::new(0, 0), 0, Some(&[])).is_err());
    }
}
