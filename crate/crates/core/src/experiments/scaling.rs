//! Log-log regression of users-required against SNR.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::db_to_linear;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% confidence interval of the slope.
    pub ci95: (f64, f64),
}

/// Least-squares slope of `ln L` against `ln SNR` (linear SNR).
pub fn fit_scaling_exponent(snr_grid_db: &[f64], l_values: &[f64]) -> Result<ScalingFit> {
    let n = snr_grid_db.len();
    if n != l_values.len() {
        return Err(Error::domain("grid and users-required lists differ in length"));
    }
    if n < 4 {
        return Err(Error::domain(format!("scaling fit needs at least 4 points, got {n}")));
    }
    if l_values.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::domain("users-required values must be positive and finite"));
    }
    let x: Vec<f64> = snr_grid_db.iter().map(|&d| db_to_linear(d).ln()).collect();
    let y: Vec<f64> = l_values.iter().map(|l| l.ln()).collect();
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::domain("degenerate SNR grid"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .expect("n >= 4 gives positive degrees of freedom")
        .inverse_cdf(0.975);
    Ok(ScalingFit {
        slope,
        intercept,
        slope_stderr,
        ci95: (slope - t * slope_stderr, slope + t * slope_stderr),
    })
}
