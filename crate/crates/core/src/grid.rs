//! Periodic grid geometry shared by the environment, solver, and observables.
//!
//! Sites are stored flat in row-major order. In `d = 1` the site index is the
//! offset; in `d = 2` site `s` decomposes as `(row, col) = (s / n, s % n)`.
//! Offsets are understood on the torus: index `k` represents the signed
//! offset `k` for `k <= n/2` and `k - n` otherwise.

/// Grid geometry: dimension, sites per axis, spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub d: usize,
    pub n: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(d: usize, n: usize, dx: f64) -> Self {
        Grid { d, n, dx }
    }

    /// Total number of sites, `n^d`.
    #[inline]
    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Volume element `dx^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.d as i32)
    }

    /// Physical side length `n * dx`.
    #[inline]
    pub fn side_length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    /// Signed offset represented by axis index `k` in `[0, n)`.
    #[inline]
    pub fn signed_offset(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if 2 * k <= n {
            k
        } else {
            k - n
        }
    }

    /// Axis index in `[0, n)` for a signed offset (wrapping).
    #[inline]
    pub fn wrap_axis(&self, k: i64) -> usize {
        let n = self.n as i64;
        (((k % n) + n) % n) as usize
    }

    /// Site index for axis coordinates (length `d`).
    #[inline]
    pub fn site_from_coords(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        let mut s = 0usize;
        for &c in coords {
            s = s * self.n + self.wrap_axis(c);
        }
        s
    }

    /// Axis coordinates (in `[0, n)`) of a site index.
    #[inline]
    pub fn coords_of(&self, site: usize) -> [usize; 2] {
        match self.d {
            1 => [site, 0],
            2 => [site / self.n, site % self.n],
            _ => unreachable!("d is validated to 1 or 2"),
        }
    }

    /// Site reached from `site` by the signed per-axis displacement `delta`.
    #[inline]
    pub fn offset_site(&self, site: usize, delta: &[i64]) -> usize {
        let c = self.coords_of(site);
        match self.d {
            1 => self.wrap_axis(c[0] as i64 + delta[0]),
            2 => {
                let r = self.wrap_axis(c[0] as i64 + delta[0]);
                let q = self.wrap_axis(c[1] as i64 + delta[1]);
                r * self.n + q
            }
            _ => unreachable!(),
        }
    }

    /// Minimal torus distance (in sites) between axis indices `a` and `b`.
    #[inline]
    pub fn axis_distance(&self, a: usize, b: usize) -> usize {
        let diff = (a as i64 - b as i64).unsigned_abs() as usize % self.n;
        diff.min(self.n - diff)
    }

    /// Max-norm torus distance in sites between `site` and the origin
    /// antipode (the wrap seam at axis index `n/2`).
    pub fn seam_distance(&self, site: usize) -> usize {
        let seam = self.n / 2;
        let c = self.coords_of(site);
        (0..self.d)
            .map(|ax| self.axis_distance(c[ax], seam))
            .min()
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_offsets_wrap() {
        let g = Grid::new(1, 8, 0.5);
        assert_eq!(g.signed_offset(0), 0);
        assert_eq!(g.signed_offset(3), 3);
        assert_eq!(g.signed_offset(4), 4);
        assert_eq!(g.signed_offset(5), -3);
        assert_eq!(g.signed_offset(7), -1);
        assert_eq!(g.wrap_axis(-1), 7);
        assert_eq!(g.wrap_axis(9), 1);
    }

    #[test]
    fn two_dim_indexing_roundtrip() {
        let g = Grid::new(2, 6, 1.0);
        for s in 0..g.sites() {
            let c = g.coords_of(s);
            assert_eq!(g.site_from_coords(&[c[0] as i64, c[1] as i64]), s);
        }
        assert_eq!(g.offset_site(0, &[-1, -1]), g.sites() - 1);
    }

    #[test]
    fn seam_band_is_near_antipode() {
        let g = Grid::new(1, 16, 1.0);
        assert_eq!(g.seam_distance(8), 0);
        assert_eq!(g.seam_distance(7), 1);
        assert_eq!(g.seam_distance(0), 8);
    }
}
