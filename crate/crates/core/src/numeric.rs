//! Small numerical kernels shared across modules.

use crate::error::{Error, Result};

/// Composite Simpson integral of uniformly spaced samples.
///
/// An odd number of intervals closes with the 3/8 rule on the last three.
pub fn simpson_uniform(values: &[f64], h: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "Simpson integration needs at least 3 samples, got {n}"
        )));
    }
    let intervals = n - 1;
    let (even_end, tail) = if intervals % 2 == 0 {
        (intervals, 0.0)
    } else {
        let k = intervals - 3;
        let t = 3.0 * h / 8.0
            * (values[k] + 3.0 * values[k + 1] + 3.0 * values[k + 2] + values[k + 3]);
        (k, t)
    };
    let mut acc = 0.0;
    if even_end > 0 {
        let mut odd = 0.0;
        let mut even = 0.0;
        for i in 1..even_end {
            if i % 2 == 1 {
                odd += values[i];
            } else {
                even += values[i];
            }
        }
        acc = h / 3.0 * (values[0] + values[even_end] + 4.0 * odd + 2.0 * even);
    }
    Ok(acc + tail)
}

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InsufficientData("x and y lengths differ".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("line fit needs 2 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        rms_residual: (ss / nf).sqrt(),
        points: n,
    })
}
