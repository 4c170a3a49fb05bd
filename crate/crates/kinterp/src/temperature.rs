//! Selection of the kernel width θ.
//!
//! The search starts from the training-set variance, generates a sequence of
//! candidates by relaxing the discrete average energy toward its continuum
//! value, scores each candidate by validation RMSE, and returns the trace
//! argmin. A log-space conjugate-gradient minimizer of the same validation
//! RMSE is provided as an alternative optimizer.

use crate::dataset::{RawDataset, SplitDataset};
use crate::error::{Error, Result};
use crate::interp::{fit, CorrectionLevel};
use crate::kernel::{normalized_distribution, sq_dist, Temperature};
use crate::metrics::compute_metrics;
use crate::moment::SolverConfig;
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct ThetaSearchConfig {
    /// Relaxation weight on the max-ent update, in (0, 1].
    pub alpha: f64,
    pub max_iters: usize,
    /// Relative tolerance on both the θ step and the validation-error change.
    pub rel_tol: f64,
    /// Neighbor count for the typical-spacing estimate.
    pub knn_k: usize,
    pub level: CorrectionLevel,
    pub solver_cfg: SolverConfig,
}

impl ThetaSearchConfig {
    pub fn new(level: CorrectionLevel) -> Self {
        ThetaSearchConfig {
            alpha: 0.5,
            max_iters: 50,
            rel_tol: 1e-3,
            knn_k: 5,
            level,
            solver_cfg: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Converged,
    SmallStep,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct ThetaSearchResult {
    pub theta_opt: Temperature,
    /// Visited (θ, validation RMSE) pairs, in visit order.
    pub theta_trace: Vec<(f64, f64)>,
    pub d_typ: f64,
    pub stop_reason: StopReason,
}

/// Initial θ guess: the mean squared deviation of the training coordinates
/// from their mean (Euclidean norm across dimensions).
pub fn theta_initial(train: &RawDataset) -> Result<Temperature> {
    if train.len() < 2 {
        return Err(Error::TooFewPoints { min: 2, got: train.len() });
    }
    let mean = coordinate_mean(train);
    let var: f64 = train.iter_points().map(|p| sq_dist(p, &mean)).sum::<f64>() / train.len() as f64;
    if var > 0.0 {
        Temperature::new(var)
    } else {
        Err(Error::ZeroVariance)
    }
}

fn coordinate_mean(data: &RawDataset) -> Vec<f64> {
    let dim = data.dim();
    let mut mean = vec![0.0; dim];
    for p in data.iter_points() {
        for (m, &x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= data.len() as f64;
    }
    mean
}

/// Typical spacing: mean over points of the mean distance to their k nearest
/// neighbors (self excluded). Brute force.
pub fn d_typ(train: &RawDataset, k: usize) -> Result<f64> {
    let n = train.len();
    if n <= k {
        return Err(Error::KnnTooLarge { k, n });
    }
    let mut total = 0.0;
    let mut dists = Vec::with_capacity(n - 1);
    for i in 0..n {
        dists.clear();
        let pi = train.point(i);
        for j in 0..n {
            if j != i {
                dists.push(sq_dist(pi, train.point(j)));
            }
        }
        dists.sort_by(f64::total_cmp);
        let mean_k: f64 = dists[..k].iter().map(|d| d.sqrt()).sum::<f64>() / k as f64;
        total += mean_k;
    }
    Ok(total / n as f64)
}

/// One max-ent update with relaxation:
/// `θ' = α * (1/N) Σ_i ||x_i - x̄||² P(||x̄ - x_i||, θ) + (1 - α) θ`,
/// with P the normalized distribution centered at the coordinate mean.
pub fn theta_next(train: &RawDataset, theta_prev: Temperature, alpha: f64) -> Temperature {
    let mean = coordinate_mean(train);
    let p = normalized_distribution(&mean, train.points_flat(), train.dim(), theta_prev)
        .expect("dataset is non-empty");
    let n = train.len() as f64;
    let energy: f64 = train
        .iter_points()
        .zip(&p.weights)
        .map(|(x, &w)| sq_dist(x, &mean) * w)
        .sum::<f64>()
        / n;
    let next = alpha * energy + (1.0 - alpha) * theta_prev.get();
    Temperature::new(next).expect("both terms are positive")
}

/// Drive the θ candidate sequence against an arbitrary validation evaluator.
/// `evaluate` maps a candidate θ to a validation error.
///
/// Candidates are floored at `1e-3 * d_typ²` to keep the sweep out of the
/// degenerate cold regime; repeated candidates (within 1e-12 relative) stop
/// the sweep.
pub fn search_theta_with<F>(
    train: &RawDataset,
    alpha: f64,
    max_iters: usize,
    rel_tol: f64,
    knn_k: usize,
    mut evaluate: F,
) -> Result<ThetaSearchResult>
where
    F: FnMut(Temperature) -> Result<f64>,
{
    let theta0 = theta_initial(train)?;
    let dtyp = d_typ(train, knn_k)?;
    let floor = 1e-3 * dtyp * dtyp;

    let clamp = |t: Temperature| -> Temperature {
        if t.get() < floor {
            Temperature::new(floor).expect("floor is positive")
        } else {
            t
        }
    };

    let mut theta = clamp(theta0);
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut stop_reason = StopReason::MaxIters;
    let mut prev_err: Option<f64> = None;

    for iter in 0..max_iters.max(1) {
        let err = evaluate(theta)?;
        trace.push((theta.get(), err));
        if iter + 1 >= max_iters.max(1) {
            break;
        }
        if let Some(prev) = prev_err {
            let denom = prev.abs().max(1e-300);
            if (err - prev).abs() / denom < rel_tol {
                stop_reason = StopReason::Converged;
                break;
            }
        }
        prev_err = Some(err);

        let next = clamp(theta_next(train, theta, alpha));
        let step = (next.get() - theta.get()).abs();
        if step < rel_tol * theta.get() || step < 1e-12 * theta.get().max(1.0) {
            stop_reason = StopReason::SmallStep;
            break;
        }
        theta = next;
    }

    let (best_theta, _) = trace
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("trace has at least one entry");
    Ok(ThetaSearchResult {
        theta_opt: Temperature::new(best_theta)?,
        theta_trace: trace,
        d_typ: dtyp,
        stop_reason,
    })
}

/// The iterative θ search: fit at each candidate, score by validation RMSE,
/// return the trace argmin.
pub fn search_theta(split: &SplitDataset, cfg: &ThetaSearchConfig) -> Result<ThetaSearchResult> {
    let train = &split.train;
    let validation = &split.validation;
    search_theta_with(train, cfg.alpha, cfg.max_iters, cfg.rel_tol, cfg.knn_k, |theta| {
        let model = fit(train, theta, cfg.level, cfg.solver_cfg)?;
        let pred = model.predict(validation.points_flat())?;
        Ok(compute_metrics(&pred, validation.values())?.rmse)
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CgConfig {
    pub max_iters: usize,
    /// Central-difference step in z = log θ.
    pub grad_step: f64,
    /// Stop when |gradient| falls below this.
    pub grad_tol: f64,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig { max_iters: 50, grad_step: 1e-4, grad_tol: 1e-8 }
    }
}

/// Polak-Ribière conjugate gradient with backtracking line search on a
/// scalar objective. Gradients come from central finite differences.
/// Returns the visited (z, f) trace; the caller takes the argmin.
pub fn minimize_scalar_cg<F>(mut f: F, z0: f64, cfg: &CgConfig) -> Vec<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut trace = vec![(z0, f(z0))];
    if cfg.max_iters == 0 {
        return trace;
    }
    let mut z = z0;
    let grad = |f: &mut F, z: f64| (f(z + cfg.grad_step) - f(z - cfg.grad_step)) / (2.0 * cfg.grad_step);

    let mut g_prev = grad(&mut f, z);
    let mut dir = -g_prev;
    let mut restarts = 0;
    let mut step0 = 1.0;

    for _ in 0..cfg.max_iters {
        if g_prev.abs() < cfg.grad_tol || !g_prev.is_finite() {
            break;
        }
        // backtracking Armijo line search along the unit direction
        let dir_norm = dir.abs().max(1e-300);
        let unit = dir / dir_norm;
        let f_z = trace.last().unwrap().1;
        let slope = g_prev * unit;
        let mut step = step0;
        let mut accepted = None;
        for _ in 0..30 {
            let z_try = z + step * unit;
            let f_try = f(z_try);
            if f_try.is_finite() && f_try <= f_z + 1e-4 * step * slope {
                accepted = Some((z_try, f_try));
                // refine with the minimizer of the quadratic through
                // (0, f_z) with slope `slope` and (step, f_try); exact
                // when the objective is locally quadratic
                let curv = (f_try - f_z - slope * step) / (step * step);
                if curv > 0.0 {
                    let t = (-slope / (2.0 * curv)).clamp(0.0, step);
                    let z_q = z + t * unit;
                    let f_q = f(z_q);
                    if f_q.is_finite() && f_q < f_try {
                        accepted = Some((z_q, f_q));
                    }
                }
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((z_new, f_new)) => {
                trace.push((z_new, f_new));
                let g_new = grad(&mut f, z_new);
                // Polak-Ribière with restart on negative beta
                let beta = (g_new * (g_new - g_prev)) / (g_prev * g_prev).max(1e-300);
                dir = if beta > 0.0 { -g_new + beta * dir } else { -g_new };
                z = z_new;
                g_prev = g_new;
                step0 = 1.0;
            }
            None => {
                restarts += 1;
                if restarts > 3 {
                    break;
                }
                // halve the initial step and restart along steepest descent
                step0 *= 0.5;
                g_prev = grad(&mut f, z);
                dir = -g_prev;
            }
        }
    }
    trace
}

/// Alternative θ optimizer: minimize validation RMSE over z = log θ by
/// conjugate gradient, initialized at the same variance-based guess.
pub fn search_theta_mle(
    split: &SplitDataset,
    level: CorrectionLevel,
    cfg: &CgConfig,
) -> Result<ThetaSearchResult> {
    let train = &split.train;
    let validation = &split.validation;
    let theta0 = theta_initial(train)?;
    let dtyp = d_typ(train, 5)?;
    let solver_cfg = SolverConfig::default();

    let objective = |z: f64| -> f64 {
        let theta = match Temperature::new(z.exp()) {
            Ok(t) => t,
            Err(_) => return f64::INFINITY,
        };
        let rmse = fit(train, theta, level, solver_cfg)
            .and_then(|m| m.predict(validation.points_flat()))
            .and_then(|pred| Ok(compute_metrics(&pred, validation.values())?.rmse));
        rmse.unwrap_or(f64::INFINITY)
    };

    let trace_z = minimize_scalar_cg(objective, theta0.get().ln(), cfg);
    let trace: Vec<(f64, f64)> = trace_z.iter().map(|&(z, e)| (z.exp(), e)).collect();
    let (best_theta, _) = trace
        .iter()
        .cloned()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("trace is non-empty");
    Ok(ThetaSearchResult {
        theta_opt: Temperature::new(best_theta)?,
        theta_trace: trace,
        d_typ: dtyp,
        stop_reason: StopReason::MaxIters,
    })
}
