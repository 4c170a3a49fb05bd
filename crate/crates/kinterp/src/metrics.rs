//! Prediction error metrics: mean L1, normalized RMSE, L-infinity, R².

use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricReport {
    /// Mean absolute error.
    pub l1_mean: f64,
    /// Root mean squared error divided by max |truth|. Falls back to the
    /// unnormalized RMSE (with `rmse_normalized == false`) when the truth
    /// is identically zero.
    pub rmse: f64,
    pub rmse_normalized: bool,
    /// Maximum absolute error.
    pub linf: f64,
    /// Coefficient of determination; `None` when the truth is constant.
    pub r2: Option<f64>,
}

pub fn compute_metrics(pred: &[f64], truth: &[f64]) -> Result<MetricReport> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { points: pred.len(), values: truth.len() });
    }
    if pred.is_empty() {
        return Err(Error::TooFewPoints { min: 1, got: 0 });
    }
    let n = pred.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut linf = 0.0f64;
    let mut max_truth = 0.0f64;
    for (&p, &t) in pred.iter().zip(truth) {
        let e = p - t;
        abs_sum += e.abs();
        sq_sum += e * e;
        linf = linf.max(e.abs());
        max_truth = max_truth.max(t.abs());
    }
    let rms = (sq_sum / n).sqrt();
    let (rmse, rmse_normalized) = if max_truth > 0.0 {
        (rms / max_truth, true)
    } else {
        (rms, false)
    };

    let mean_truth: f64 = truth.iter().sum::<f64>() / n;
    let sst: f64 = truth.iter().map(|&t| (t - mean_truth).powi(2)).sum();
    let r2 = if sst > 0.0 { Some(1.0 - sq_sum / sst) } else { None };

    Ok(MetricReport { l1_mean: abs_sum / n, rmse, rmse_normalized, linf, r2 })
}
