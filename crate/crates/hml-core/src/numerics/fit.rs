//! Least-squares regression through the origin.

/// Slope and coefficient of determination of a through-origin line fit.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    /// Fitted slope of y = slope * x.
    pub slope: f64,
    /// R^2 computed against the mean of y.
    pub r_squared: f64,
}

/// Fit `y = slope * x` by least squares.
///
/// The slope minimizes the sum of squared residuals for a line pinned to the
/// origin, slope = sum(x*y) / sum(x^2). R^2 is reported relative to the mean
/// of y so that it measures how much better the through-origin line does than
/// a constant, which is the quantity the linearity checks care about.
pub fn fit_through_origin(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty(), "regression needs at least one point");
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let slope = sxy / sxx;
    let mean_y: f64 = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - slope * a;
            r * r
        })
        .sum();
    let ss_tot: f64 = y
        .iter()
        .map(|b| {
            let r = b - mean_y;
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    LineFit { slope, r_squared }
}
