//! Weighted least squares with known per-point standard deviations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    /// Per-point residuals `y - (intercept + slope x)`.
    pub residuals: Vec<f64>,
}

/// Fit `y = intercept + slope * x` with weights `1 / sigma^2`.
pub fn weighted_least_squares(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<WlsFit> {
    if x.len() != y.len() || x.len() != sigma.len() {
        return Err(Error::usage("mismatched regression inputs"));
    }
    if x.len() < 3 {
        return Err(Error::usage("regression needs at least 3 points"));
    }
    if sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::usage("regression sigmas must be positive"));
    }
    let w: Vec<f64> = sigma.iter().map(|&s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let swx: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
    let swy: f64 = w.iter().zip(y).map(|(wi, yi)| wi * yi).sum();
    let swxx: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi * xi).sum();
    let swxy: f64 = w
        .iter()
        .zip(x.iter().zip(y))
        .map(|(wi, (xi, yi))| wi * xi * yi)
        .sum();
    let delta = sw * swxx - swx * swx;
    if delta <= 0.0 {
        return Err(Error::usage("degenerate design (identical x values)"));
    }
    let slope = (sw * swxy - swx * swy) / delta;
    let intercept = (swxx * swy - swx * swxy) / delta;
    let se_slope = (sw / delta).sqrt();
    let se_intercept = (swxx / delta).sqrt();
    let residuals = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| yi - (intercept + slope * xi))
        .collect();
    Ok(WlsFit {
        slope,
        intercept,
        se_slope,
        se_intercept,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let s = [0.1; 4];
        let fit = weighted_least_squares(&x, &y, &s).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn weights_downweight_noisy_points() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 1.0, 10.0];
        // huge sigma on the outlier: the fit should track the first two
        let fit = weighted_least_squares(&x, &y, &[0.01, 0.01, 100.0]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(weighted_least_squares(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0]).is_err());
        assert!(
            weighted_least_squares(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).is_err()
        );
        assert!(
            weighted_least_squares(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err()
        );
    }
}
