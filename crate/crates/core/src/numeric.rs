//! Small shared numeric routines: ordinary least squares, Pearson
//! correlation, and quantiles of sorted samples.

/// Result of a one-variable least-squares fit y = intercept + slope * x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_std: f64,
    /// Residual sum of squares, kept for combining piecewise fits.
    pub ss_res: f64,
    /// Total sum of squares around the y mean.
    pub ss_tot: f64,
    /// True when the response is constant up to floating-point noise; the
    /// fit is then the exact horizontal line and R^2 is one by convention.
    pub degenerate_response: bool,
}

/// Spread below this (relative to the mean magnitude) is rounding noise, not
/// signal: summing identical values already perturbs the last few bits.
fn spread_floor(m: f64, mean: f64) -> f64 {
    m * 1e-24 * mean.mul_add(mean, 1.0)
}

/// Ordinary least squares over paired slices. Callers guarantee at least two
/// points and nonzero x spread.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let m = x.len() as f64;
    assert!(x.len() >= 2);
    let x_mean = x.iter().sum::<f64>() / m;
    let y_mean = y.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - x_mean) * (xi - x_mean);
        sxy += (xi - x_mean) * (yi - y_mean);
    }
    assert!(sxx > 0.0, "zero spread in the regressor");
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - (intercept + slope * xi);
        ss_res += r * r;
        ss_tot += (yi - y_mean) * (yi - y_mean);
    }
    // A constant response fits exactly: residuals are zero by construction.
    let degenerate_response = ss_tot <= spread_floor(m, y_mean);
    let r_squared = if degenerate_response { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope,
        intercept,
        r_squared,
        residual_std: (ss_res / m).sqrt(),
        ss_res,
        ss_tot,
        degenerate_response,
    }
}

/// Pearson correlation coefficient; 0 when either side has no spread.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let m = x.len() as f64;
    let x_mean = x.iter().sum::<f64>() / m;
    let y_mean = y.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - x_mean) * (xi - x_mean);
        syy += (yi - y_mean) * (yi - y_mean);
        sxy += (xi - x_mean) * (yi - y_mean);
    }
    if sxx <= spread_floor(m, x_mean) || syy <= spread_floor(m, y_mean) {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Quantile of an ascending-sorted sample at level p in [0, 1], with linear
/// interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&p));
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let fit = linear_fit(&x, &y);
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
        assert!(fit.residual_std < 1e-12);
    }

    #[test]
    fn constant_response_has_unit_r_squared() {
        let x = [0.0, 1.0, 2.0];
        let y = [5.0, 5.0, 5.0];
        let fit = linear_fit(&x, &y);
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
        assert_eq!(fit.residual_std, 0.0);
    }

    #[test]
    fn pearson_signs() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up = [2.0, 4.0, 6.0, 8.0];
        let down = [8.0, 6.0, 4.0, 2.0];
        assert!((pearson(&x, &up) - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &down) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[1.0; 4]), 0.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 5.0);
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert!((quantile_sorted(&s, 0.125) - 1.5).abs() < 1e-12);
    }
}
