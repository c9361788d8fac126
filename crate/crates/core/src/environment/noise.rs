//! Reproducible white-noise slices and their mollification.
//!
//! Every slice is a pure function of `(master_seed, realization_id, step)`:
//! the triple is mixed into a 256-bit ChaCha8 key, so any slice can be
//! regenerated in `O(n^d)` work without replaying earlier steps. Values are
//! bit-exact within a build; across platforms they are statistically
//! identical but bit-exactness is not promised.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::domain::DomainSpec;
use super::kernel::Mollifier;

/// Deterministic, seekable source of white-noise slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    pub master_seed: u64,
    pub realization_id: u64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, realization_id: u64) -> Self {
        NoiseStream {
            master_seed,
            realization_id,
        }
    }
}

/// One time slice of discrete white noise; entries are i.i.d. centered
/// Gaussian with variance `1/(dt * dx^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSlice {
    pub values: Vec<f64>,
    pub step: usize,
}

/// Mollified noise slice `xi = dx^d * (phi (circular conv) eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSlice {
    pub values: Vec<f64>,
    pub step: usize,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit ChaCha key for a `(master_seed, realization_id, step)` triple.
fn slice_key(stream: NoiseStream, step: usize) -> [u8; 32] {
    let mut state = stream.master_seed;
    let a = splitmix64(&mut state);
    state ^= stream.realization_id.wrapping_mul(0xA24B_AED4_963E_E407);
    let b = splitmix64(&mut state);
    state ^= (step as u64).wrapping_mul(0x9FB2_1C65_1E98_DF25);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    key
}

/// Sample the white-noise slice at `step`. Deterministic in
/// `(master_seed, realization_id, step)`; entries i.i.d.
/// `N(0, 1/(dt*dx^d))`.
pub fn sample_noise_slice(
    stream: NoiseStream,
    step: usize,
    domain: &DomainSpec,
) -> Result<NoiseSlice> {
    if step >= domain.n_steps {
        return Err(Error::usage(format!(
            "noise step {} out of range [0, {})",
            step, domain.n_steps
        )));
    }
    Ok(sample_noise_slice_unchecked(stream, step, domain))
}

/// As [`sample_noise_slice`] without the horizon range check; used by passes
/// that re-derive slices for shorter sub-horizons.
pub fn sample_noise_slice_unchecked(
    stream: NoiseStream,
    step: usize,
    domain: &DomainSpec,
) -> NoiseSlice {
    let mut values = vec![0.0; domain.sites()];
    sample_noise_values_into(stream, step, domain, &mut values);
    NoiseSlice { values, step }
}

/// Allocation-free slice generation into a caller buffer.
pub fn sample_noise_values_into(
    stream: NoiseStream,
    step: usize,
    domain: &DomainSpec,
    out: &mut [f64],
) {
    debug_assert_eq!(out.len(), domain.sites());
    let mut rng = ChaCha8Rng::from_seed(slice_key(stream, step));
    let scale = 1.0 / (domain.dt * domain.cell_volume()).sqrt();
    for v in out.iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v = z * scale;
    }
}

/// Fill `out` with the mollified slice `xi(x) = dx^d * sum_j phi(j) eta(x-j)`.
pub fn mollify_slice_into(
    eta: &NoiseSlice,
    m: &Mollifier,
    domain: &DomainSpec,
    out: &mut [f64],
) -> Result<()> {
    mollify_values_into(&eta.values, m, domain, out)
}

/// As [`mollify_slice_into`] on a raw value buffer.
pub fn mollify_values_into(
    eta: &[f64],
    m: &Mollifier,
    domain: &DomainSpec,
    out: &mut [f64],
) -> Result<()> {
    let grid = domain.grid();
    if eta.len() != grid.sites() || out.len() != grid.sites() {
        return Err(Error::usage(format!(
            "slice length {} does not match grid sites {}",
            eta.len(),
            grid.sites()
        )));
    }
    let dv = domain.cell_volume();
    let r = m.radius as i64;
    match domain.d {
        1 => {
            let n = grid.n as i64;
            for (x, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in -r..=r {
                    let phi = m.values[(j + r) as usize];
                    if phi != 0.0 {
                        let idx = (((x as i64 - j) % n) + n) % n;
                        acc += phi * eta[idx as usize];
                    }
                }
                *o = dv * acc;
            }
        }
        2 => {
            let support = m.support();
            for (x, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (off, phi) in &support {
                    let idx = grid.offset_site(x, &[-off[0], -off[1]]);
                    acc += phi * eta[idx];
                }
                *o = dv * acc;
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Circular convolution of a noise slice with the mollifier, times `dx^d`.
pub fn mollify_slice(eta: &NoiseSlice, m: &Mollifier, domain: &DomainSpec) -> Result<XiSlice> {
    let mut values = vec![0.0; domain.sites()];
    mollify_slice_into(eta, m, domain, &mut values)?;
    Ok(XiSlice {
        values,
        step: eta.step,
    })
}
