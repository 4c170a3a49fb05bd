//! Gaussian kernel evaluation and the zeroth-moment-normalized discrete
//! distribution.
//!
//! The `(2πθ)^(-D/2)` prefactor is omitted throughout: every downstream use
//! is either normalized or a ratio, where it cancels, and dropping it avoids
//! overflow at small θ in high dimension.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The kernel width parameter θ, in squared-length units of the normalized
/// coordinates. Strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta.is_finite() {
            Ok(Temperature(theta))
        } else {
            Err(Error::InvalidTheta(theta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Temperature {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Temperature::new(v)
    }
}

impl From<Temperature> for f64 {
    fn from(t: Temperature) -> f64 {
        t.0
    }
}

/// Normalized kernel weights: non-negative, summing to one.
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    pub weights: Vec<f64>,
}

/// Squared Euclidean distance between two points of equal dimension.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Unnormalized Gaussian kernel `exp(-sq_dist / 2θ)`. Underflow to 0 is fine.
pub fn gaussian_unnorm(sq_dist: f64, theta: Temperature) -> f64 {
    debug_assert!(sq_dist >= 0.0);
    (-sq_dist / (2.0 * theta.get())).exp()
}

/// Max-shifted Gaussian weights at `query` over `centers` (flat row-major,
/// `dim` coordinates per point), written into `out`.
///
/// Each weight equals the unnormalized Gaussian scaled by a common positive
/// factor that makes the largest weight exactly 1, so the vector stays finite
/// and nonzero at any θ. Ratios of weights are unaffected.
pub(crate) fn shifted_weights(query: &[f64], centers: &[f64], dim: usize, theta: Temperature, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(centers.len() / dim);
    let mut min_sq = f64::INFINITY;
    for c in centers.chunks_exact(dim) {
        let d = sq_dist(query, c);
        out.push(d);
        if d < min_sq {
            min_sq = d;
        }
    }
    let two_theta = 2.0 * theta.get();
    for w in out.iter_mut() {
        *w = (-(*w - min_sq) / two_theta).exp();
    }
}

/// The normalized discrete distribution of Gaussian weights centered at
/// `query`: `P_i = exp(-||query - x_i||²/2θ) / Σ_j exp(-||query - x_j||²/2θ)`.
///
/// Computed via the max-shift trick, so the result is finite for any finite
/// inputs (the largest term is exactly 1 before normalization).
pub fn normalized_distribution(
    query: &[f64],
    centers: &[f64],
    dim: usize,
    theta: Temperature,
) -> Result<DiscreteDistribution> {
    if centers.is_empty() || centers.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: centers.len() % dim,
        });
    }
    if query.len() != dim {
        return Err(Error::QueryDimension {
            expected: dim,
            found: query.len(),
        });
    }
    let mut weights = Vec::new();
    shifted_weights(query, centers, dim, theta, &mut weights);
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(DiscreteDistribution { weights })
}
