//! Thin wrapper over rustfft for flat real fields on the periodic grid.
//!
//! Transforms are unnormalized on the forward side; the inverse divides by
//! `n^d`. In `d = 2` the transform is applied row-wise then column-wise on
//! the row-major buffer.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// FFT plans plus scratch for one worker. Cheap to construct; not shared
/// across threads (each trajectory owns one).
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex<f64>>,
    col: Vec<Complex<f64>>,
    /// Main transform buffer of length `n^d`; holds the spectrum after
    /// [`Spectral::forward_real`].
    pub buf: Vec<Complex<f64>>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Spectral {
            grid,
            fwd,
            inv,
            scratch: vec![Complex::default(); scratch_len],
            col: vec![Complex::default(); grid.n],
            buf: vec![Complex::default(); grid.sites()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn transform_in_place(&mut self, forward: bool) {
        let n = self.grid.n;
        let plan = if forward { &self.fwd } else { &self.inv };
        match self.grid.d {
            1 => plan.process_with_scratch(&mut self.buf, &mut self.scratch),
            2 => {
                for row in self.buf.chunks_exact_mut(n) {
                    plan.process_with_scratch(row, &mut self.scratch);
                }
                for c in 0..n {
                    for r in 0..n {
                        self.col[r] = self.buf[r * n + c];
                    }
                    plan.process_with_scratch(&mut self.col, &mut self.scratch);
                    for r in 0..n {
                        self.buf[r * n + c] = self.col[r];
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    /// DFT of a real field into `self.buf`.
    pub fn forward_real(&mut self, input: &[f64]) {
        debug_assert_eq!(input.len(), self.buf.len());
        for (b, &x) in self.buf.iter_mut().zip(input) {
            *b = Complex::new(x, 0.0);
        }
        self.transform_in_place(true);
    }

    /// Inverse DFT of `self.buf` into a real field (imaginary parts are
    /// roundoff and dropped). Includes the `1/n^d` normalization.
    pub fn inverse_to_real(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.buf.len());
        self.transform_in_place(false);
        let norm = 1.0 / self.grid.sites() as f64;
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re * norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_identity_1d() {
        let g = Grid::new(1, 32, 1.0);
        let mut sp = Spectral::new(g);
        let input: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin() + 0.2).collect();
        sp.forward_real(&input);
        let mut out = vec![0.0; 32];
        sp.inverse_to_real(&mut out);
        for (a, b) in input.iter().zip(&out) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn roundtrip_is_identity_2d() {
        let g = Grid::new(2, 8, 1.0);
        let mut sp = Spectral::new(g);
        let input: Vec<f64> = (0..64).map(|i| (i as f64 * 0.11).cos()).collect();
        sp.forward_real(&input);
        let mut out = vec![0.0; 64];
        sp.inverse_to_real(&mut out);
        for (a, b) in input.iter().zip(&out) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_mode_is_sum() {
        let g = Grid::new(2, 4, 1.0);
        let mut sp = Spectral::new(g);
        let input: Vec<f64> = (0..16).map(|i| i as f64).collect();
        sp.forward_real(&input);
        let total: f64 = input.iter().sum();
        assert!((sp.buf[0].re - total).abs() < 1e-12);
        assert!(sp.buf[0].im.abs() < 1e-12);
    }
}
