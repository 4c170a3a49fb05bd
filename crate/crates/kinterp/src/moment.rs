//! First-moment correction solver.
//!
//! Given a query x, finds the shifted evaluation point x̃ = x + δx such that
//! the Gaussian-weighted displacement sum Σ_i (x - x_i) w_i(x̃) vanishes,
//! which makes the normalized distribution's first moment equal x exactly.
//! Each iteration linearizes the condition into a D×D system.
//!
//! The weights here are unnormalized Gaussians: the root is invariant under
//! any common positive rescaling, so we apply the same max-shift used for
//! the normalized distribution to stay finite at small θ.

use crate::kernel::{shifted_weights, sq_dist, Temperature};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Residual norm below which the iteration stops.
    pub tol_resid: f64,
    pub max_iter: usize,
    /// Relative ridge added to the system diagonal (scaled by trace/D).
    pub ridge: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol_resid: 1e-10, max_iter: 50, ridge: 1e-12 }
    }
}

/// Outcome of a first-moment solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentCorrection {
    /// The shift δx = x̃ - x.
    pub delta: Vec<f64>,
    /// ‖Σ_i (x - x_i) w_i‖ at exit (max-shifted weights).
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MomentCorrection {
    fn failed(dim: usize, residual_norm: f64, iterations: usize) -> Self {
        MomentCorrection { delta: vec![0.0; dim], residual_norm, iterations, converged: false }
    }
}

/// Solve a dense D×D system `a * y = b` by Gaussian elimination with partial
/// pivoting. `a` is row-major and is consumed.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let d = b.len();
    debug_assert_eq!(a.len(), d * d);
    for col in 0..d {
        let mut pivot = col;
        let mut best = a[col * d + col].abs();
        for row in col + 1..d {
            let v = a[row * d + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..d {
                a.swap(col * d + k, pivot * d + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * d + col];
        for row in col + 1..d {
            let factor = a[row * d + col] / diag;
            if factor != 0.0 {
                for k in col..d {
                    a[row * d + k] -= factor * a[col * d + k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    for col in (0..d).rev() {
        let mut acc = b[col];
        for k in col + 1..d {
            acc -= a[col * d + k] * b[k];
        }
        b[col] = acc / a[col * d + col];
        if !b[col].is_finite() {
            return None;
        }
    }
    Some(b)
}

/// Iteratively solve for the corrected evaluation point x̃ of `query`.
///
/// `centers` is flat row-major with `dim` coordinates per point. Starting
/// from x̃ = x, each step builds
/// `A[a][k] = (1/θ) Σ_i (x_a - x_{a,i})(x̃_k - x_{k,i}) w_i` and residual
/// `r[a] = Σ_i (x_a - x_{a,i}) w_i`, solves `A δ = r`, and shifts x̃ by δ.
/// Stops when ‖r‖ falls below `cfg.tol_resid` or `cfg.max_iter` is reached.
///
/// On a singular system, divergence, or non-finite iterates, returns
/// `converged == false` with a zero delta; callers fall back to the
/// uncorrected evaluation point.
pub fn solve_first_moment(
    query: &[f64],
    centers: &[f64],
    dim: usize,
    theta: Temperature,
    cfg: &SolverConfig,
) -> MomentCorrection {
    debug_assert_eq!(query.len(), dim);
    debug_assert!(centers.len() >= 2 * dim && centers.len() % dim == 0);

    // bounding-box diagonal of the centers, for the divergence guard
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for c in centers.chunks_exact(dim) {
        for (d, &v) in c.iter().enumerate() {
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    let diameter = sq_dist(&lo, &hi).sqrt().max(1e-12);
    let step_limit = 10.0 * diameter;

    let mut x_tilde = query.to_vec();
    let mut weights: Vec<f64> = Vec::new();
    let mut matrix = vec![0.0f64; dim * dim];
    let mut residual = vec![0.0f64; dim];
    let inv_theta = 1.0 / theta.get();

    let mut resid_norm = f64::INFINITY;
    for iter in 0..=cfg.max_iter {
        shifted_weights(&x_tilde, centers, dim, theta, &mut weights);

        matrix.iter_mut().for_each(|m| *m = 0.0);
        residual.iter_mut().for_each(|r| *r = 0.0);
        for (c, &w) in centers.chunks_exact(dim).zip(&weights) {
            for a in 0..dim {
                let qa = query[a] - c[a];
                residual[a] += qa * w;
                for k in 0..dim {
                    matrix[a * dim + k] += qa * (x_tilde[k] - c[k]) * w;
                }
            }
        }
        resid_norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
        if !resid_norm.is_finite() {
            // f64::MAX rather than infinity so the value stays JSON-safe
            return MomentCorrection::failed(dim, f64::MAX, iter);
        }
        if resid_norm <= cfg.tol_resid {
            let delta: Vec<f64> = x_tilde.iter().zip(query).map(|(t, q)| t - q).collect();
            return MomentCorrection { delta, residual_norm: resid_norm, iterations: iter, converged: true };
        }
        if iter == cfg.max_iter {
            break;
        }

        for m in matrix.iter_mut() {
            *m *= inv_theta;
        }
        let trace: f64 = (0..dim).map(|a| matrix[a * dim + a]).sum();
        let boost = cfg.ridge * (trace.abs() / dim as f64).max(1.0);
        for a in 0..dim {
            matrix[a * dim + a] += boost;
        }

        let step = match solve_dense(matrix.clone(), residual.clone()) {
            Some(s) => s,
            None => return MomentCorrection::failed(dim, resid_norm, iter),
        };
        let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        if !step_norm.is_finite() || step_norm > step_limit {
            return MomentCorrection::failed(dim, resid_norm, iter);
        }
        for (t, s) in x_tilde.iter_mut().zip(&step) {
            *t += s;
        }
    }
    // out of iterations: keep the last iterate, flagged as not converged
    let delta: Vec<f64> = x_tilde.iter().zip(query).map(|(t, q)| t - q).collect();
    MomentCorrection { delta, residual_norm: resid_norm, iterations: cfg.max_iter, converged: false }
}
