//! Exact spectral heat semigroup on the torus.

use crate::environment::DomainSpec;
use crate::error::Result;
use crate::fft::Spectral;
use crate::grid::Grid;

use std::f64::consts::PI;

/// Fourier multipliers `exp(-dt * |2 pi m / L|^2 / 2)` per mode, laid out to
/// match the flat DFT ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatPropagator {
    pub multipliers: Vec<f64>,
    grid: Grid,
    dt: f64,
}

/// Squared angular frequency of a flat mode index.
fn mode_omega2(grid: &Grid, site: usize) -> f64 {
    let l = grid.side_length();
    let c = grid.coords_of(site);
    let mut w2 = 0.0;
    for ax in 0..grid.d {
        let m = grid.signed_offset(c[ax]) as f64;
        let w = 2.0 * PI * m / l;
        w2 += w * w;
    }
    w2
}

pub fn build_propagator(domain: &DomainSpec) -> Result<HeatPropagator> {
    domain.validate()?;
    let grid = domain.grid();
    let multipliers = (0..grid.sites())
        .map(|s| (-0.5 * domain.dt * mode_omega2(&grid, s)).exp())
        .collect();
    Ok(HeatPropagator {
        multipliers,
        grid,
        dt: domain.dt,
    })
}

impl HeatPropagator {
    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Diffuse a real field over one `dt` using the workspace. The spectrum
    /// of the *input* field remains in `spectral.buf`'s pre-multiplied form;
    /// callers needing it must read it via the observer hooks in the runner,
    /// which capture it before multiplication.
    pub fn apply(&self, spectral: &mut Spectral, field: &mut [f64]) {
        spectral.forward_real(field);
        for (b, &m) in spectral.buf.iter_mut().zip(&self.multipliers) {
            *b *= m;
        }
        spectral.inverse_to_real(field);
    }
}

/// Torus heat kernel at elapsed time `t` centered at `center`, computed by a
/// direct mode sum (quadratic cost). Independent oracle for the spectral
/// flow: both describe the same discrete object, but this path shares no FFT
/// code with the solver.
pub fn heat_kernel_direct(domain: &DomainSpec, t: f64, center: usize) -> Vec<f64> {
    let grid = domain.grid();
    let sites = grid.sites();
    let l = grid.side_length();
    let mut out = vec![0.0; sites];
    let cc = grid.coords_of(center);
    for (x, o) in out.iter_mut().enumerate() {
        let xc = grid.coords_of(x);
        let mut acc = 0.0;
        match grid.d {
            1 => {
                for m in 0..grid.n {
                    let fm = grid.signed_offset(m) as f64;
                    let w = 2.0 * PI * fm / l;
                    let phase = 2.0 * PI * fm * (xc[0] as f64 - cc[0] as f64) / grid.n as f64;
                    acc += (-0.5 * t * w * w).exp() * phase.cos();
                }
            }
            2 => {
                for m0 in 0..grid.n {
                    let f0 = grid.signed_offset(m0) as f64;
                    let w0 = 2.0 * PI * f0 / l;
                    let p0 = 2.0 * PI * f0 * (xc[0] as f64 - cc[0] as f64) / grid.n as f64;
                    for m1 in 0..grid.n {
                        let f1 = grid.signed_offset(m1) as f64;
                        let w1 = 2.0 * PI * f1 / l;
                        let p1 = 2.0 * PI * f1 * (xc[1] as f64 - cc[1] as f64) / grid.n as f64;
                        acc += (-0.5 * t * (w0 * w0 + w1 * w1)).exp() * (p0 + p1).cos();
                    }
                }
            }
            _ => unreachable!(),
        }
        // Delta initial mass 1/dx^d spread over modes: the DFT of the delta
        // is flat, so each mode contributes 1/(n^d dx^d) = 1/L^d.
        *o = acc / l.powi(grid.d as i32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::DomainSpec;

    fn dom() -> DomainSpec {
        DomainSpec::new(1, 32, 0.5, 0.05, 10, 1.0).unwrap()
    }

    #[test]
    fn zero_mode_is_one_and_rest_in_unit_interval() {
        let p = build_propagator(&dom()).unwrap();
        assert_eq!(p.multipliers[0], 1.0);
        assert!(p.multipliers.iter().all(|&m| m > 0.0 && m <= 1.0));
    }

    #[test]
    fn multiplier_matches_definition() {
        let d = dom();
        let p = build_propagator(&d).unwrap();
        let l = d.side_length();
        for m in 0..d.n {
            let f = d.grid().signed_offset(m) as f64;
            let expect = (-d.dt * (2.0 * PI * f / l).powi(2) / 2.0).exp();
            assert!((p.multipliers[m] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_field_is_preserved() {
        let d = dom();
        let p = build_propagator(&d).unwrap();
        let mut sp = Spectral::new(d.grid());
        let mut field = vec![1.7; d.sites()];
        p.apply(&mut sp, &mut field);
        for v in &field {
            assert!((v - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_property() {
        // P(dt) o P(dt) = P(2 dt) on random input to 1e-12.
        let d = dom();
        let d2 = DomainSpec {
            dt: 2.0 * d.dt,
            ..d
        };
        let p1 = build_propagator(&d).unwrap();
        let p2 = build_propagator(&d2).unwrap();
        let mut sp = Spectral::new(d.grid());
        let mut a: Vec<f64> = (0..d.sites()).map(|i| ((i * 37 + 5) % 11) as f64).collect();
        let mut b = a.clone();
        p1.apply(&mut sp, &mut a);
        p1.apply(&mut sp, &mut a);
        p2.apply(&mut sp, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_flow_matches_direct_kernel_1d() {
        let d = dom();
        let p = build_propagator(&d).unwrap();
        let mut sp = Spectral::new(d.grid());
        let mut field = vec![0.0; d.sites()];
        field[0] = 1.0 / d.cell_volume();
        for _ in 0..7 {
            p.apply(&mut sp, &mut field);
        }
        let oracle = heat_kernel_direct(&d, 7.0 * d.dt, 0);
        for (a, b) in field.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn spectral_flow_matches_direct_kernel_2d() {
        let d = DomainSpec::new(2, 12, 0.7, 0.1, 10, 1.0).unwrap();
        let p = build_propagator(&d).unwrap();
        let mut sp = Spectral::new(d.grid());
        let center = 3 * d.n + 5;
        let mut field = vec![0.0; d.sites()];
        field[center] = 1.0 / d.cell_volume();
        for _ in 0..4 {
            p.apply(&mut sp, &mut field);
        }
        let oracle = heat_kernel_direct(&d, 4.0 * d.dt, center);
        for (a, b) in field.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
