//! The kinetic-regularized interpolator: fit training data at a selectable
//! moment-correction level, then predict at query points.
//!
//! - `None`: plain normalized-kernel interpolation.
//! - `FirstMoment`: each query point is shifted by the first-moment
//!   correction before the kernel weights are formed.
//! - `SecondMoment`: additionally, at fit time every training point gets a
//!   self-predicted value and the stored weights become ψ_i = 2φ_i - φ̂_i,
//!   cancelling the spurious quadratic error at training points.

use crate::dataset::RawDataset;
use crate::error::{Error, Result};
use crate::kernel::{shifted_weights, Temperature};
use crate::moment::{solve_first_moment, MomentCorrection, SolverConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorrectionLevel {
    None,
    FirstMoment,
    SecondMoment,
}

impl CorrectionLevel {
    pub fn as_u8(self) -> u8 {
        match self {
            CorrectionLevel::None => 0,
            CorrectionLevel::FirstMoment => 1,
            CorrectionLevel::SecondMoment => 2,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(CorrectionLevel::None),
            1 => Ok(CorrectionLevel::FirstMoment),
            2 => Ok(CorrectionLevel::SecondMoment),
            other => Err(Error::Config(format!("correction level must be 0, 1 or 2, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitReport {
    /// Training points whose first-moment solve failed (fell back to δx = 0).
    pub n_failed_corrections: usize,
    /// Largest exit residual over the training-point solves.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionReport {
    pub n_failed_corrections: usize,
    pub max_residual: f64,
    /// Per-query convergence of the first-moment solve. All `true` at
    /// level `None`, where no solve runs.
    pub converged: Vec<bool>,
}

/// Immutable trained state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    train_points: Vec<f64>,
    dim: usize,
    train_values: Vec<f64>,
    /// Stored weights: equal to the training values unless the level is
    /// `SecondMoment`.
    psi: Vec<f64>,
    theta: Temperature,
    level: CorrectionLevel,
    solver_cfg: SolverConfig,
    /// Per-training-point corrections, recorded at level `SecondMoment`.
    self_corrections: Option<Vec<MomentCorrection>>,
    n_failed_corrections: usize,
    fit_max_residual: f64,
}

/// Fit a model on (normalized) training data.
pub fn fit(
    train: &RawDataset,
    theta: Temperature,
    level: CorrectionLevel,
    cfg: SolverConfig,
) -> Result<FittedModel> {
    if train.len() < 2 {
        return Err(Error::TooFewPoints { min: 2, got: train.len() });
    }
    let dim = train.dim();
    let points = train.points_flat().to_vec();
    let values = train.values().to_vec();

    let mut model = FittedModel {
        train_points: points,
        dim,
        train_values: values.clone(),
        psi: values,
        theta,
        level,
        solver_cfg: cfg,
        self_corrections: None,
        n_failed_corrections: 0,
        fit_max_residual: 0.0,
    };

    if level == CorrectionLevel::SecondMoment {
        let n = train.len();
        let mut corrections = Vec::with_capacity(n);
        let mut psi = Vec::with_capacity(n);
        let mut weights = Vec::new();
        for i in 0..n {
            let x = train.point(i);
            let mut corr = solve_first_moment(x, &model.train_points, dim, theta, &cfg);
            model.fit_max_residual = model.fit_max_residual.max(corr.residual_norm);
            if !corr.converged {
                // the correction formula assumes the first moment is
                // matched; without that, 2φ - φ̂ adds bias instead of
                // removing it, so keep the raw value for this point
                model.n_failed_corrections += 1;
                corr.delta.iter_mut().for_each(|d| *d = 0.0);
                psi.push(model.train_values[i]);
                corrections.push(corr);
                continue;
            }
            let x_tilde: Vec<f64> = x.iter().zip(&corr.delta).map(|(a, b)| a + b).collect();
            // self-prediction over all j, including j = i
            shifted_weights(&x_tilde, &model.train_points, dim, theta, &mut weights);
            let total: f64 = weights.iter().sum();
            let phi_hat: f64 = model
                .train_values
                .iter()
                .zip(&weights)
                .map(|(v, w)| v * w)
                .sum::<f64>()
                / total;
            psi.push(2.0 * model.train_values[i] - phi_hat);
            corrections.push(corr);
        }
        model.psi = psi;
        model.self_corrections = Some(corrections);
    }
    Ok(model)
}

impl FittedModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.train_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_values.is_empty()
    }

    pub fn theta(&self) -> Temperature {
        self.theta
    }

    pub fn level(&self) -> CorrectionLevel {
        self.level
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn self_corrections(&self) -> Option<&[MomentCorrection]> {
        self.self_corrections.as_deref()
    }

    pub fn fit_report(&self) -> FitReport {
        FitReport {
            n_failed_corrections: self.n_failed_corrections,
            max_residual: self.fit_max_residual,
        }
    }

    /// Predict at query points (flat row-major, `dim` coordinates each).
    pub fn predict(&self, queries: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict_with_report(queries)?.0)
    }

    /// Predict and report per-query solver outcomes.
    pub fn predict_with_report(&self, queries: &[f64]) -> Result<(Vec<f64>, PredictionReport)> {
        if queries.len() % self.dim != 0 {
            return Err(Error::QueryDimension { expected: self.dim, found: queries.len() % self.dim });
        }
        let n_queries = queries.len() / self.dim;
        let mut out = Vec::with_capacity(n_queries);
        let mut report = PredictionReport {
            n_failed_corrections: 0,
            max_residual: 0.0,
            converged: Vec::with_capacity(n_queries),
        };
        let mut weights = Vec::new();
        let mut x_tilde = vec![0.0; self.dim];
        for q in queries.chunks_exact(self.dim) {
            x_tilde.copy_from_slice(q);
            let mut ok = true;
            if self.level >= CorrectionLevel::FirstMoment {
                let corr = solve_first_moment(q, &self.train_points, self.dim, self.theta, &self.solver_cfg);
                report.max_residual = report.max_residual.max(corr.residual_norm);
                if !corr.converged {
                    ok = false;
                    report.n_failed_corrections += 1;
                }
                // diverged and singular solves leave delta at zero, so this
                // is the identity for them; exhausted solves contribute
                // their last stable iterate as a partial shift
                for (t, d) in x_tilde.iter_mut().zip(&corr.delta) {
                    *t += d;
                }
            }
            report.converged.push(ok);
            shifted_weights(&x_tilde, &self.train_points, self.dim, self.theta, &mut weights);
            let total: f64 = weights.iter().sum();
            let value: f64 = self.psi.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / total;
            out.push(value);
        }
        Ok((out, report))
    }
}
