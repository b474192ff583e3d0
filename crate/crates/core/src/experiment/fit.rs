//! Least-squares growth fit of ratioConservative against log R.

use serde::{Deserialize, Serialize};

use super::sweep::RatioRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit y = slope x + intercept; r^2 is 1 for exact (including constant) data.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LogFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidParams(format!("need at least 3 points, got {}", x.len().min(y.len()))));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("all x values coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LogFit { slope, intercept, r_squared })
}

pub fn log_fit(rows: &[RatioRow]) -> Result<LogFit> {
    let x: Vec<f64> = rows.iter().map(|r| r.log_r).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio_conservative).collect();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (1..=5).map(|k| (k as f64 * 10.0).ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_rows() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn too_few_rows() {
        assert!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(log_fit(&[]).is_err());
    }
}
