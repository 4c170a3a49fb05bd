//! Closed-form benchmark targets, synthetic samplers, and the multiplicative
//! Gaussian noise model.
//!
//! All randomness is drawn from ChaCha8, seeded explicitly, so datasets are
//! reproducible across runs of the same build.

use crate::dataset::RawDataset;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// Shape parameter of the camel function.
const CAMEL_K: f64 = 0.2;
/// Rastrigin amplitude.
const RASTRIGIN_A: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkFunction {
    /// Franke's bivariate test function on [0,1]².
    Franke2d,
    /// Two-humped camel function in D dimensions, humps at 1/3 and 2/3.
    Camel { dim: usize },
    /// 6D Ackley function, global minimum 0 at the origin.
    Ackley6d,
    /// Weierstrass partial sum with `terms` cosine terms on [0,1].
    Weierstrass { terms: u32 },
    /// Separable Rastrigin function in D dimensions.
    Rastrigin { dim: usize },
}

impl BenchmarkFunction {
    pub fn dim(&self) -> usize {
        match *self {
            BenchmarkFunction::Franke2d => 2,
            BenchmarkFunction::Camel { dim } => dim,
            BenchmarkFunction::Ackley6d => 6,
            BenchmarkFunction::Weierstrass { .. } => 1,
            BenchmarkFunction::Rastrigin { dim } => dim,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            BenchmarkFunction::Franke2d => "franke2d".into(),
            BenchmarkFunction::Camel { dim } => format!("camel{dim}d"),
            BenchmarkFunction::Ackley6d => "ackley6d".into(),
            BenchmarkFunction::Weierstrass { terms } => format!("weierstrass{terms}"),
            BenchmarkFunction::Rastrigin { dim } => format!("rastrigin{dim}d"),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match *self {
            BenchmarkFunction::Franke2d => franke(x[0], x[1]),
            BenchmarkFunction::Camel { dim } => camel(x, dim),
            BenchmarkFunction::Ackley6d => ackley6(x),
            BenchmarkFunction::Weierstrass { terms } => weierstrass(x[0], terms),
            BenchmarkFunction::Rastrigin { .. } => rastrigin(x),
        }
    }
}

fn franke(x: f64, y: f64) -> f64 {
    0.75 * (-((9.0 * x - 2.0).powi(2)) / 4.0 - ((9.0 * y - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-((9.0 * x + 1.0).powi(2)) / 49.0 - ((9.0 * y + 1.0).powi(2)) / 10.0).exp()
        + 0.5 * (-((9.0 * x - 7.0).powi(2)) / 4.0 - ((9.0 * y - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-((9.0 * x - 4.0).powi(2)) - ((9.0 * y - 7.0).powi(2))).exp()
}

fn camel(x: &[f64], dim: usize) -> f64 {
    let k2 = CAMEL_K * CAMEL_K;
    let s1: f64 = x.iter().map(|&v| (v - 1.0 / 3.0).powi(2)).sum::<f64>() / k2;
    let s2: f64 = x.iter().map(|&v| (v - 2.0 / 3.0).powi(2)).sum::<f64>() / k2;
    ((-s1).exp() + (-s2).exp()) / (2.0 * (CAMEL_K * PI.sqrt()).powi(dim as i32))
}

fn ackley6(x: &[f64]) -> f64 {
    let mean_sq = x.iter().map(|&v| v * v).sum::<f64>() / 6.0;
    let mean_cos = x.iter().map(|&v| (2.0 * PI * v).cos()).sum::<f64>() / 6.0;
    -20.0 * (-0.2 * mean_sq.sqrt()).exp() - mean_cos.exp() + 20.0 + 1f64.exp()
}

fn weierstrass(x: f64, terms: u32) -> f64 {
    (0..terms)
        .map(|i| 0.75f64.powi(i as i32) * (5f64.powi(i as i32) * PI * x).cos())
        .sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| v * v - RASTRIGIN_A * (2.0 * PI * v).cos() + RASTRIGIN_A)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    UniformRandom,
    RegularGrid,
}

/// Sample `n` points of `fn` on [0,1]^D, deterministic per seed.
///
/// A regular grid uses the smallest per-dimension resolution m with m^D >= n
/// and truncates the row-major lattice to the first n points.
pub fn sample(f: BenchmarkFunction, n: usize, mode: SampleMode, seed: u64) -> Result<RawDataset> {
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    let dim = f.dim();
    let mut points = Vec::with_capacity(n * dim);
    match mode {
        SampleMode::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..n * dim {
                points.push(rng.gen::<f64>());
            }
        }
        SampleMode::RegularGrid => {
            let mut m = 2usize;
            while m.pow(dim as u32) < n {
                m += 1;
            }
            let mut index = vec![0usize; dim];
            'outer: loop {
                for &i in &index {
                    points.push(i as f64 / (m - 1) as f64);
                }
                if points.len() >= n * dim {
                    break;
                }
                // row-major increment, last axis fastest
                for d in (0..dim).rev() {
                    index[d] += 1;
                    if index[d] < m {
                        continue 'outer;
                    }
                    index[d] = 0;
                }
                break;
            }
        }
    }
    let values: Vec<f64> = points.chunks_exact(dim).map(|p| f.eval_unchecked(p)).collect();
    RawDataset::from_flat(points, values, dim)
}

/// Multiplicative Gaussian noise: `phi -> phi * (1 + s * eps)` with
/// `eps ~ Normal(mu, sigma)`. The defaults sigma = 1/3, mu = 0 keep
/// `1 + s*eps` within [1-s, 1+s] for nearly all draws.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub s: f64,
    pub sigma: f64,
    pub mu: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(s: f64, seed: u64) -> Self {
        NoiseSpec { s, sigma: 1.0 / 3.0, mu: 0.0, seed }
    }
}

/// Apply multiplicative Gaussian noise to the values; points are unchanged.
pub fn add_noise(data: &RawDataset, spec: &NoiseSpec) -> RawDataset {
    if spec.s == 0.0 {
        return data.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(spec.mu, spec.sigma).expect("sigma must be positive");
    let values: Vec<f64> = data
        .values()
        .iter()
        .map(|&v| v * (1.0 + spec.s * normal.sample(&mut rng)))
        .collect();
    RawDataset::from_flat(data.points_flat().to_vec(), values, data.dim())
        .expect("noisy copy keeps shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ackley_zero_at_origin() {
        let v = BenchmarkFunction::Ackley6d.eval(&[0.0; 6]).unwrap();
        assert!(v.abs() < 1e-12, "got {v}");
    }

    #[test]
    fn rastrigin_zero_at_origin() {
        for dim in [1, 3, 6] {
            let v = BenchmarkFunction::Rastrigin { dim }.eval(&vec![0.0; dim]).unwrap();
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn weierstrass_value_at_zero() {
        let v = BenchmarkFunction::Weierstrass { terms: 3 }.eval(&[0.0]).unwrap();
        assert!((v - 2.3125).abs() < 1e-15); // 1 + 3/4 + 9/16
    }

    #[test]
    fn franke_value_at_origin() {
        // frozen from an independent evaluation of the four-term sum
        let v = BenchmarkFunction::Franke2d.eval(&[0.0, 0.0]).unwrap();
        assert!((v - 0.7664205912849231).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn camel_value_at_first_hump_6d() {
        let f = BenchmarkFunction::Camel { dim: 6 };
        let v = f.eval(&[1.0 / 3.0; 6]).unwrap();
        // 1/(2 (0.2 sqrt(pi))^6) * (1 + exp(-6 (1/3)^2 / 0.04))
        let expect = (1.0 + (-6.0 * (1.0f64 / 3.0).powi(2) / 0.04).exp())
            / (2.0 * (0.2 * PI.sqrt()).powi(6));
        assert!((v - expect).abs() < 1e-10);
        assert!((v - 252.0).abs() < 1.0, "got {v}");
    }

    #[test]
    fn rastrigin_is_separable() {
        let f6 = BenchmarkFunction::Rastrigin { dim: 6 };
        let f1 = BenchmarkFunction::Rastrigin { dim: 1 };
        let x = [0.11, 0.92, 0.4, 0.73, 0.05, 0.61];
        let whole = f6.eval(&x).unwrap();
        let parts: f64 = x.iter().map(|&v| f1.eval(&[v]).unwrap()).sum();
        assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn camel_symmetries() {
        let f = BenchmarkFunction::Camel { dim: 3 };
        let x = [0.2, 0.55, 0.81];
        let v = f.eval(&x).unwrap();
        let permuted = f.eval(&[0.55, 0.81, 0.2]).unwrap();
        assert!((v - permuted).abs() < 1e-12);
        let mirrored = f.eval(&[0.8, 0.45, 0.19]).unwrap();
        assert!((v - mirrored).abs() < 1e-12);
    }

    #[test]
    fn weierstrass_slope_grows_with_terms() {
        let grid: Vec<f64> = (0..2000).map(|i| i as f64 / 1999.0).collect();
        let max_slope = |terms: u32| -> f64 {
            let f = BenchmarkFunction::Weierstrass { terms };
            grid.windows(2)
                .map(|w| {
                    let a = f.eval(&[w[0]]).unwrap();
                    let b = f.eval(&[w[1]]).unwrap();
                    ((b - a) / (w[1] - w[0])).abs()
                })
                .fold(0.0, f64::max)
        };
        let slopes: Vec<f64> = (1..=5).map(max_slope).collect();
        for w in slopes.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn regular_grid_layouts() {
        let g = sample(BenchmarkFunction::Weierstrass { terms: 3 }, 3, SampleMode::RegularGrid, 0).unwrap();
        assert_eq!(g.points_flat(), &[0.0, 0.5, 1.0]);

        let g2 = sample(BenchmarkFunction::Franke2d, 9, SampleMode::RegularGrid, 0).unwrap();
        assert_eq!(g2.len(), 9);
        let expect = [0.0, 0.0, 0.0, 0.5, 0.0, 1.0, 0.5, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 0.0, 1.0, 0.5, 1.0, 1.0];
        assert_eq!(g2.points_flat(), &expect);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample(BenchmarkFunction::Franke2d, 50, SampleMode::UniformRandom, 7).unwrap();
        let b = sample(BenchmarkFunction::Franke2d, 50, SampleMode::UniformRandom, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_zero_scale_is_identity_and_preserves_zeros() {
        let data = sample(BenchmarkFunction::Franke2d, 20, SampleMode::UniformRandom, 1).unwrap();
        let same = add_noise(&data, &NoiseSpec::new(0.0, 3));
        assert_eq!(data, same);

        let zeros = RawDataset::new(vec![vec![0.0], vec![1.0]], vec![0.0, 0.0]).unwrap();
        let noisy = add_noise(&zeros, &NoiseSpec::new(0.5, 3));
        assert_eq!(noisy.values(), &[0.0, 0.0]);
    }

    #[test]
    fn noise_statistics_match_spec() {
        let n = 100_000;
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
        let vals = vec![1.0; n];
        let data = RawDataset::new(pts, vals).unwrap();
        let s = 0.05;
        let noisy = add_noise(&data, &NoiseSpec::new(s, 99));
        let rel: Vec<f64> = noisy.values().iter().map(|&v| v - 1.0).collect();
        let mean: f64 = rel.iter().sum::<f64>() / n as f64;
        let var: f64 = rel.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        let expect = s / 3.0;
        assert!((std - expect).abs() / expect < 0.05, "std={std}, expect={expect}");
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let data = sample(BenchmarkFunction::Franke2d, 30, SampleMode::UniformRandom, 2).unwrap();
        let a = add_noise(&data, &NoiseSpec::new(0.1, 5));
        let b = add_noise(&data, &NoiseSpec::new(0.1, 5));
        assert_eq!(a, b);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        assert!(BenchmarkFunction::Franke2d.eval(&[0.5]).is_err());
    }
}
