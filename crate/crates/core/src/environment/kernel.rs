//! Mollifier kernels and their exact discrete autocorrelation.
//!
//! The kernel `phi` is defined by its grid samples; the covariance table is
//! the exact discrete autocorrelation `R(k) = dx^d * sum_j phi(j+k) phi(j)`,
//! so the mass identities used by the observables hold in discrete arithmetic
//! rather than approximately.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

use super::domain::DomainSpec;

/// Supported kernel shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierShape {
    /// Piecewise linear: `phi(k) = amp * (1 - |k|/(radius+1))` for `|k| <= radius`.
    Triangular,
    /// `phi(k) = amp * (1 - (|k|/radius)^2)^2` for `|k| <= radius`; zero at
    /// the support edge.
    QuarticBump,
}

/// Discrete mollifier: a nonnegative stencil supported on the Euclidean ball
/// of `radius` sites, plus its `L1`/`Linf` norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    pub shape: MollifierShape,
    /// Support half-width in sites.
    pub radius: usize,
    /// Dense `(2*radius+1)^d` block, row-major, centered at the origin.
    pub values: Vec<f64>,
    /// Discrete `||phi||_1 = dx^d * sum phi`.
    pub l1: f64,
    /// `||phi||_inf = max phi`.
    pub linf: f64,
    d: usize,
    dx: f64,
}

impl Mollifier {
    /// Degenerate point kernel `phi = (c)` at the origin. Wrap-safe on any
    /// grid; used for single-site diagnostics where the usual radius >= 1
    /// requirement cannot hold.
    pub fn single_site(c: f64, domain: &DomainSpec) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::config(format!(
                "point kernel amplitude must be > 0, got {c}"
            )));
        }
        Ok(Mollifier {
            shape: MollifierShape::Triangular,
            radius: 0,
            values: vec![c],
            l1: domain.cell_volume() * c,
            linf: c,
            d: domain.d,
            dx: domain.dx,
        })
    }

    /// Stencil width per axis, `2*radius + 1`.
    #[inline]
    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }

    /// Value at the signed per-axis offset (0 outside the support block).
    pub fn at_offset(&self, offset: &[i64]) -> f64 {
        let w = self.width() as i64;
        let r = self.radius as i64;
        let mut idx = 0i64;
        for &o in offset.iter().take(self.d) {
            if o.abs() > r {
                return 0.0;
            }
            idx = idx * w + (o + r);
        }
        self.values[idx as usize]
    }

    /// Iterate `(signed offset per axis, value)` over nonzero stencil entries.
    pub fn support(&self) -> Vec<([i64; 2], f64)> {
        let r = self.radius as i64;
        let mut out = Vec::new();
        match self.d {
            1 => {
                for o in -r..=r {
                    let v = self.at_offset(&[o]);
                    if v != 0.0 {
                        out.push(([o, 0], v));
                    }
                }
            }
            2 => {
                for a in -r..=r {
                    for b in -r..=r {
                        let v = self.at_offset(&[a, b]);
                        if v != 0.0 {
                            out.push(([a, b], v));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    /// Export `(offset, value)` rows as CSV for inspection (d=1 uses a single
    /// offset column, d=2 two).
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.d == 1 {
            writeln!(w, "offset,value")?;
            let r = self.radius as i64;
            for o in -r..=r {
                writeln!(w, "{},{:.16e}", o, self.at_offset(&[o]))?;
            }
        } else {
            writeln!(w, "offset_row,offset_col,value")?;
            let r = self.radius as i64;
            for a in -r..=r {
                for b in -r..=r {
                    writeln!(w, "{},{},{:.16e}", a, b, self.at_offset(&[a, b]))?;
                }
            }
        }
        Ok(())
    }
}

/// Exact discrete spatial covariance `R = phi (*) phi` on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTable {
    /// `R(k*dx)` on the full `n^d` grid of torus offsets, row-major.
    pub values: Vec<f64>,
    /// `R(0)`.
    pub r0: f64,
    grid: Grid,
}

impl CovarianceTable {
    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Value at a signed per-axis offset.
    pub fn at_offset(&self, offset: &[i64]) -> f64 {
        self.values[self.grid.site_from_coords(offset)]
    }

    /// Export `(offset, value)` rows over the support window `[-2r, 2r]`.
    pub fn write_csv<W: Write>(&self, w: &mut W, support_radius: usize) -> Result<()> {
        let r = (2 * support_radius) as i64;
        if self.grid.d == 1 {
            writeln!(w, "offset,value")?;
            for o in -r..=r {
                writeln!(w, "{},{:.16e}", o, self.at_offset(&[o]))?;
            }
        } else {
            writeln!(w, "offset_row,offset_col,value")?;
            for a in -r..=r {
                for b in -r..=r {
                    writeln!(w, "{},{},{:.16e}", a, b, self.at_offset(&[a, b]))?;
                }
            }
        }
        Ok(())
    }
}

fn shape_value(shape: MollifierShape, radius: usize, amplitude: f64, rho: f64) -> f64 {
    let r = radius as f64;
    match shape {
        MollifierShape::Triangular => {
            if rho > r {
                0.0
            } else {
                amplitude * (1.0 - rho / (r + 1.0))
            }
        }
        MollifierShape::QuarticBump => {
            if rho >= r {
                0.0
            } else {
                let u = 1.0 - (rho / r) * (rho / r);
                amplitude * u * u
            }
        }
    }
}

/// Build a mollifier from a named shape.
///
/// The wrap-safety constraint `2 * radius * dx < L_phys / 2` keeps the
/// autocorrelation unambiguous on the torus.
pub fn build_mollifier(
    shape: MollifierShape,
    radius: usize,
    amplitude: f64,
    domain: &DomainSpec,
) -> Result<Mollifier> {
    if radius < 1 {
        return Err(Error::config("mollifier radius must be >= 1"));
    }
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::config(format!(
            "mollifier amplitude must be > 0, got {amplitude}"
        )));
    }
    if 4 * radius >= domain.n {
        return Err(Error::config(format!(
            "kernel radius {} violates wrap safety: need 2*radius*dx < L_phys/2, i.e. 4*radius < n = {}",
            radius, domain.n
        )));
    }

    let w = 2 * radius + 1;
    let len = w.pow(domain.d as u32);
    let mut values = vec![0.0; len];
    let r = radius as i64;
    match domain.d {
        1 => {
            for o in -r..=r {
                values[(o + r) as usize] = shape_value(shape, radius, amplitude, o.abs() as f64);
            }
        }
        2 => {
            for a in -r..=r {
                for b in -r..=r {
                    let rho = ((a * a + b * b) as f64).sqrt();
                    values[((a + r) * w as i64 + (b + r)) as usize] =
                        shape_value(shape, radius, amplitude, rho);
                }
            }
        }
        _ => unreachable!(),
    }

    let dv = domain.cell_volume();
    let l1 = dv * values.iter().sum::<f64>();
    let linf = values.iter().cloned().fold(0.0, f64::max);
    Ok(Mollifier {
        shape,
        radius,
        values,
        l1,
        linf,
        d: domain.d,
        dx: domain.dx,
    })
}

/// Exact discrete autocorrelation `R(k) = dx^d * sum_j phi(j+k) phi(j)` on the
/// full torus grid.
pub fn covariance_from_mollifier(m: &Mollifier, domain: &DomainSpec) -> Result<CovarianceTable> {
    if 4 * m.radius >= domain.n {
        return Err(Error::config(
            "kernel radius violates wrap safety for covariance",
        ));
    }
    if m.d != domain.d || m.dx != domain.dx {
        return Err(Error::usage("mollifier was built for a different domain"));
    }

    let grid = domain.grid();
    let dv = domain.cell_volume();
    let mut values = vec![0.0; grid.sites()];
    let support = m.support();
    for (off_j, phi_j) in &support {
        for (off_jk, phi_jk) in &support {
            // contribution to R at offset k = off_jk - off_j
            let k = [off_jk[0] - off_j[0], off_jk[1] - off_j[1]];
            let site = grid.site_from_coords(&k[..domain.d]);
            values[site] += dv * phi_j * phi_jk;
        }
    }
    let r0 = values[0];
    Ok(CovarianceTable { values, r0, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: usize) -> DomainSpec {
        DomainSpec::new(1, n, 1.0, 0.1, 10, 1.0).unwrap()
    }

    #[test]
    fn triangular_radius_one_matches_hand_values() {
        let m = build_mollifier(MollifierShape::Triangular, 1, 1.0, &dom(16)).unwrap();
        assert_eq!(m.values, vec![0.5, 1.0, 0.5]);
        assert!((m.l1 - 2.0).abs() < 1e-15);
        assert!((m.linf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_kernel_rejected() {
        assert!(build_mollifier(MollifierShape::Triangular, 1, 0.0, &dom(16)).is_err());
        assert!(build_mollifier(MollifierShape::Triangular, 0, 1.0, &dom(16)).is_err());
        assert!(build_mollifier(MollifierShape::Triangular, 4, 1.0, &dom(16)).is_err());
    }

    #[test]
    fn quartic_bump_vanishes_at_support_edge() {
        let m = build_mollifier(MollifierShape::QuarticBump, 3, 2.0, &dom(32)).unwrap();
        assert!(m.values.iter().all(|&v| v >= 0.0));
        assert_eq!(m.at_offset(&[3]), 0.0);
        assert_eq!(m.at_offset(&[-3]), 0.0);
        assert!(m.at_offset(&[2]) > 0.0);
        assert!((m.linf - 2.0).abs() < 1e-15);
    }

    #[test]
    fn covariance_matches_brute_force_autocorrelation() {
        // Triangular (0.5, 1, 0.5), dx=1 -> R(0)=1.5, R(+-1)=1.0, R(+-2)=0.25.
        let d = dom(16);
        let m = build_mollifier(MollifierShape::Triangular, 1, 1.0, &d).unwrap();
        let cov = covariance_from_mollifier(&m, &d).unwrap();
        assert!((cov.r0 - 1.5).abs() < 1e-15);
        assert!((cov.at_offset(&[1]) - 1.0).abs() < 1e-15);
        assert!((cov.at_offset(&[-1]) - 1.0).abs() < 1e-15);
        assert!((cov.at_offset(&[2]) - 0.25).abs() < 1e-15);
        assert!((cov.at_offset(&[-2]) - 0.25).abs() < 1e-15);
        for k in 3..=8i64 {
            assert_eq!(cov.at_offset(&[k]), 0.0);
            assert_eq!(cov.at_offset(&[-k]), 0.0);
        }
    }

    #[test]
    fn covariance_is_symmetric_and_dominated_by_r0() {
        let d = DomainSpec::new(2, 12, 0.5, 0.1, 10, 1.0).unwrap();
        let m = build_mollifier(MollifierShape::QuarticBump, 2, 1.3, &d).unwrap();
        let cov = covariance_from_mollifier(&m, &d).unwrap();
        for a in -6i64..6 {
            for b in -6i64..6 {
                let r = cov.at_offset(&[a, b]);
                assert!((r - cov.at_offset(&[-a, -b])).abs() < 1e-15);
                assert!(cov.r0 >= r.abs() - 1e-15);
            }
        }
    }

    #[test]
    fn covariance_support_is_twice_kernel_support() {
        let d = dom(32);
        let m = build_mollifier(MollifierShape::Triangular, 2, 1.0, &d).unwrap();
        let cov = covariance_from_mollifier(&m, &d).unwrap();
        assert!(cov.at_offset(&[4]) > 0.0);
        assert_eq!(cov.at_offset(&[5]), 0.0);
    }

    #[test]
    fn single_site_kernel_covariance() {
        // phi = (c) at the origin only: R(0) = c^2 * dx, R(k != 0) = 0.
        // Quartic with radius 1 has support only at the center site.
        let d = dom(16);
        let m = build_mollifier(MollifierShape::QuarticBump, 1, 3.0, &d).unwrap();
        assert_eq!(m.at_offset(&[1]), 0.0);
        let cov = covariance_from_mollifier(&m, &d).unwrap();
        assert!((cov.r0 - 9.0).abs() < 1e-15);
        assert_eq!(cov.at_offset(&[1]), 0.0);
    }
}
