//! Small statistical helpers: sample moments and ordinary least squares with
//! a confidence interval on the slope.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Unweighted least-squares line with residual diagnostics.
#[derive(Debug, Clone)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_se: f64,
    /// Two-sided 95% confidence interval for the slope (t distribution,
    /// `len - 2` degrees of freedom).
    pub slope_ci95: (f64, f64),
    pub residuals: Vec<f64>,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(
            "fit needs equally many x and y values".into(),
        ));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InvalidParameter(
            "fit needs at least three points".into(),
        ));
    }
    let nf = n as f64;
    let xbar = xs.iter().sum::<f64>() / nf;
    let ybar = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("degenerate x values".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    let df = nf - 2.0;
    let slope_se = (ss_res / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(0.975);
    let slope_ci95 = (slope - t * slope_se, slope + t * slope_se);
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        slope_se,
        slope_ci95,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovers_parameters() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-10);
    }

    #[test]
    fn noisy_line_has_sane_interval() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 2.0 * x + if i % 2 == 0 { 0.3 } else { -0.3 })
            .collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!(fit.slope_ci95.0 < 2.0 && 2.0 < fit.slope_ci95.1);
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn mean_se_of_constant_sample_is_zero() {
        let (m, se) = mean_se(&[2.5, 2.5, 2.5]);
        assert_eq!(m, 2.5);
        assert_eq!(se, 0.0);
    }
}
