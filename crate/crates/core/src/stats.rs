//! Least-squares helpers shared by the growth-rate estimators.

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    /// Mean absolute fitted value over the sample.
    pub mean_abs_fit: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        let c = y.first().copied().unwrap_or(0.0);
        return LineFit {
            slope: 0.0,
            intercept: c,
            rms_residual: 0.0,
            mean_abs_fit: c.abs(),
        };
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    let mut fit_abs = 0.0;
    for (a, b) in x.iter().zip(y) {
        let f = intercept + slope * a;
        ss += (b - f) * (b - f);
        fit_abs += f.abs();
    }
    LineFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
        mean_abs_fit: fit_abs / n,
    }
}

/// Fit over the last half of a series indexed `first_index, first_index+1, ...`.
/// Growth rates converge from the tail, so the head is discarded.
pub fn tail_fit(series: &[f64], first_index: usize) -> LineFit {
    let len = series.len();
    let start = len / 2;
    let xs: Vec<f64> = (start..len).map(|i| (i + first_index) as f64).collect();
    fit_line(&xs, &series[start..])
}
