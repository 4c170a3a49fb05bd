//! Benchmark experiment pipeline: sample, optionally corrupt with noise,
//! normalize, split, search θ, and score against a fresh noiseless test set.
//!
//! Shared by the CLI `benchmark` / `sweep-theta` subcommands and by the
//! acceptance test suite.

use crate::benchfn::{add_noise, sample, BenchmarkFunction, NoiseSpec, SampleMode};
use crate::dataset::{normalize_and_split, SplitDataset};
use crate::error::Result;
use crate::interp::{fit, CorrectionLevel};
use crate::kernel::Temperature;
use crate::metrics::compute_metrics;
use crate::moment::SolverConfig;
use crate::rbf::{rbf_fit, rbf_tune_with};
use crate::temperature::{search_theta, search_theta_mle, CgConfig, ThetaSearchConfig};
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Seed offsets deriving the noise and test-sampling streams from the run
/// seed, so the three streams never alias.
const NOISE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;
const TEST_SEED_OFFSET: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kinetic,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaSelection {
    /// The iterative candidate sweep scored by validation error.
    Present,
    /// Conjugate-gradient minimization in log θ.
    Mle,
    /// Skip the search and use a fixed θ.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub function: BenchmarkFunction,
    pub n: usize,
    pub sampling: SampleMode,
    pub seeds: Vec<u64>,
    pub noise_s: f64,
    /// Correction levels evaluated for the kinetic method.
    pub levels: Vec<CorrectionLevel>,
    pub methods: Vec<Method>,
    pub split_ratio: f64,
    pub test_n: usize,
    pub selection: ThetaSelection,
    /// Relaxation weight of the iterative θ search.
    pub alpha: f64,
    pub max_search_iters: usize,
}

impl ExperimentConfig {
    pub fn new(function: BenchmarkFunction, n: usize) -> Self {
        ExperimentConfig {
            function,
            n,
            sampling: SampleMode::UniformRandom,
            seeds: vec![0],
            noise_s: 0.0,
            levels: vec![
                CorrectionLevel::None,
                CorrectionLevel::FirstMoment,
                CorrectionLevel::SecondMoment,
            ],
            methods: vec![Method::Kinetic],
            split_ratio: 0.8,
            test_n: 10_000,
            selection: ThetaSelection::Present,
            alpha: 0.5,
            max_search_iters: 50,
        }
    }
}

/// One row of the results table: metrics for a (method, level, seed) cell.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub function: String,
    pub method: Method,
    pub level: u8,
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub noise_s: f64,
    pub theta_opt: f64,
    pub theta_over_dtyp2: f64,
    pub rmse: f64,
    pub l1_mean: f64,
    pub linf: f64,
    pub r2: Option<f64>,
    pub fit_seconds: f64,
    pub search_seconds: f64,
    pub predict_seconds: f64,
    pub n_failed_corrections: usize,
}

pub const RESULT_CSV_HEADER: &str = "schema_version,function,method,level,dim,n,seed,noise_s,theta_opt,theta_over_dtyp2,rmse,l1_mean,linf,r2,fit_seconds,search_seconds,predict_seconds,n_failed_corrections";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let method = match self.method {
            Method::Kinetic => "kinetic",
            Method::Rbf => "rbf",
        };
        let r2 = self.r2.map(|v| v.to_string()).unwrap_or_else(|| "nan".into());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.schema_version,
            self.function,
            method,
            self.level,
            self.dim,
            self.n,
            self.seed,
            self.noise_s,
            self.theta_opt,
            self.theta_over_dtyp2,
            self.rmse,
            self.l1_mean,
            self.linf,
            r2,
            self.fit_seconds,
            self.search_seconds,
            self.predict_seconds,
            self.n_failed_corrections,
        )
    }
}

/// Training-side data for one seed: the normalized split plus the transform
/// and the original (pre-normalization) dataset.
pub struct SeedData {
    pub split: SplitDataset,
    pub test_points_norm: Vec<f64>,
    pub test_truth: Vec<f64>,
}

/// Prepare the per-seed pipeline inputs: sampled (possibly noisy) training
/// data, normalized and split, plus a fresh noiseless test set mapped into
/// the same normalized coordinates. Test truth stays in original units.
pub fn prepare_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedData> {
    let raw = sample(cfg.function, cfg.n, cfg.sampling, seed)?;
    let raw = if cfg.noise_s > 0.0 {
        add_noise(&raw, &NoiseSpec::new(cfg.noise_s, seed.wrapping_add(NOISE_SEED_OFFSET)))
    } else {
        raw
    };
    let split = normalize_and_split(&raw, cfg.split_ratio, seed)?;

    let test = sample(
        cfg.function,
        cfg.test_n,
        SampleMode::UniformRandom,
        seed.wrapping_add(TEST_SEED_OFFSET),
    )?;
    let mut test_points_norm = Vec::with_capacity(test.points_flat().len());
    for p in test.iter_points() {
        test_points_norm.extend_from_slice(&split.transform.normalize_point(p));
    }
    Ok(SeedData {
        split,
        test_points_norm,
        test_truth: test.values().to_vec(),
    })
}

fn theta_for_level(
    data: &SeedData,
    level: CorrectionLevel,
    cfg: &ExperimentConfig,
) -> Result<(Temperature, f64, Vec<(f64, f64)>)> {
    match cfg.selection {
        ThetaSelection::Fixed(t) => {
            let theta = Temperature::new(t)?;
            let dtyp = crate::temperature::d_typ(&data.split.train, 5)?;
            Ok((theta, dtyp, Vec::new()))
        }
        ThetaSelection::Present => {
            let mut scfg = ThetaSearchConfig::new(level);
            scfg.alpha = cfg.alpha;
            scfg.max_iters = cfg.max_search_iters;
            let res = search_theta(&data.split, &scfg)?;
            Ok((res.theta_opt, res.d_typ, res.theta_trace))
        }
        ThetaSelection::Mle => {
            let res = search_theta_mle(
                &data.split,
                level,
                &CgConfig { max_iters: cfg.max_search_iters, ..CgConfig::default() },
            )?;
            Ok((res.theta_opt, res.d_typ, res.theta_trace))
        }
    }
}

/// Run the full benchmark loop and collect one row per
/// (seed, method, level). Rows are ordered by (method, level, seed).
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let data = prepare_seed(cfg, seed)?;
        for &method in &cfg.methods {
            match method {
                Method::Kinetic => {
                    for &level in &cfg.levels {
                        rows.push(run_kinetic_cell(cfg, &data, seed, level)?);
                    }
                }
                Method::Rbf => rows.push(run_rbf_cell(cfg, &data, seed)?),
            }
        }
    }
    rows.sort_by(|a, b| {
        let key = |r: &ResultRow| (format!("{:?}", r.method), r.level, r.n, r.seed);
        key(a).cmp(&key(b))
    });
    Ok(rows)
}

fn run_kinetic_cell(
    cfg: &ExperimentConfig,
    data: &SeedData,
    seed: u64,
    level: CorrectionLevel,
) -> Result<ResultRow> {
    let search_start = Instant::now();
    let (theta, dtyp, _) = theta_for_level(data, level, cfg)?;
    let search_seconds = search_start.elapsed().as_secs_f64();

    let fit_start = Instant::now();
    let model = fit(&data.split.train, theta, level, SolverConfig::default())?;
    let fit_seconds = fit_start.elapsed().as_secs_f64();

    let predict_start = Instant::now();
    let (pred_norm, report) = model.predict_with_report(&data.test_points_norm)?;
    let predict_seconds = predict_start.elapsed().as_secs_f64();

    let pred: Vec<f64> = pred_norm
        .iter()
        .map(|&v| data.split.transform.denormalize_value(v))
        .collect();
    let metrics = compute_metrics(&pred, &data.test_truth)?;
    Ok(ResultRow {
        schema_version: RESULT_SCHEMA_VERSION,
        function: cfg.function.name(),
        method: Method::Kinetic,
        level: level.as_u8(),
        dim: cfg.function.dim(),
        n: cfg.n,
        seed,
        noise_s: cfg.noise_s,
        theta_opt: theta.get(),
        theta_over_dtyp2: theta.get() / (dtyp * dtyp),
        rmse: metrics.rmse,
        l1_mean: metrics.l1_mean,
        linf: metrics.linf,
        r2: metrics.r2,
        fit_seconds,
        search_seconds,
        predict_seconds,
        n_failed_corrections: model.fit_report().n_failed_corrections + report.n_failed_corrections,
    })
}

fn run_rbf_cell(cfg: &ExperimentConfig, data: &SeedData, seed: u64) -> Result<ResultRow> {
    let search_start = Instant::now();
    let (theta, dtyp) = match cfg.selection {
        ThetaSelection::Fixed(t) => (
            Temperature::new(t)?,
            crate::temperature::d_typ(&data.split.train, 5)?,
        ),
        _ => {
            let (t, _) = rbf_tune_with(&data.split, cfg.alpha, cfg.max_search_iters, 1e-3, 5)?;
            (t, crate::temperature::d_typ(&data.split.train, 5)?)
        }
    };
    let search_seconds = search_start.elapsed().as_secs_f64();

    let fit_start = Instant::now();
    let model = rbf_fit(&data.split.train, theta, 0.0)?;
    let fit_seconds = fit_start.elapsed().as_secs_f64();

    let predict_start = Instant::now();
    let pred_norm = model.predict(&data.test_points_norm)?;
    let predict_seconds = predict_start.elapsed().as_secs_f64();

    let pred: Vec<f64> = pred_norm
        .iter()
        .map(|&v| data.split.transform.denormalize_value(v))
        .collect();
    let metrics = compute_metrics(&pred, &data.test_truth)?;
    Ok(ResultRow {
        schema_version: RESULT_SCHEMA_VERSION,
        function: cfg.function.name(),
        method: Method::Rbf,
        level: 0,
        dim: cfg.function.dim(),
        n: cfg.n,
        seed,
        noise_s: cfg.noise_s,
        theta_opt: theta.get(),
        theta_over_dtyp2: theta.get() / (dtyp * dtyp),
        rmse: metrics.rmse,
        l1_mean: metrics.l1_mean,
        linf: metrics.linf,
        r2: metrics.r2,
        fit_seconds,
        search_seconds,
        predict_seconds,
        n_failed_corrections: 0,
    })
}

/// Seed-mean RMSE over the rows matching a method/level cell.
pub fn mean_rmse(rows: &[ResultRow], method: Method, level: u8) -> Option<f64> {
    let matched: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.level == level)
        .map(|r| r.rmse)
        .collect();
    if matched.is_empty() {
        None
    } else {
        Some(matched.iter().sum::<f64>() / matched.len() as f64)
    }
}

/// Render rows as the results CSV.
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.to_csv_line());
    }
    out
}

/// Validation-RMSE trace over an explicit θ grid, per correction level.
/// Returns (θ, θ/d_typ², level, rmse) rows.
pub fn sweep_theta(
    split: &SplitDataset,
    thetas: &[f64],
    levels: &[CorrectionLevel],
) -> Result<Vec<(f64, f64, u8, f64)>> {
    let dtyp = crate::temperature::d_typ(&split.train, 5)?;
    let mut rows = Vec::new();
    for &level in levels {
        for &t in thetas {
            let theta = Temperature::new(t)?;
            let model = fit(&split.train, theta, level, SolverConfig::default())?;
            let pred = model.predict(split.validation.points_flat())?;
            let rmse = compute_metrics(&pred, split.validation.values())?.rmse;
            rows.push((t, t / (dtyp * dtyp), level.as_u8(), rmse));
        }
    }
    Ok(rows)
}

/// Log-spaced grid of `count` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_reproducible() {
        let mut cfg = ExperimentConfig::new(BenchmarkFunction::Franke2d, 120);
        cfg.test_n = 200;
        cfg.levels = vec![CorrectionLevel::None];
        cfg.max_search_iters = 5;
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].rmse, b[0].rmse);
        assert_eq!(a[0].theta_opt, b[0].theta_opt);
    }

    #[test]
    fn test_points_stay_out_of_training() {
        let cfg = ExperimentConfig::new(BenchmarkFunction::Franke2d, 100);
        let data = prepare_seed(&cfg, 7).unwrap();
        let train = &data.split.train;
        for q in data.test_points_norm.chunks_exact(2) {
            for p in train.iter_points() {
                assert!(p != q, "test point coincides with a training point");
            }
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 1.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[4] - 1.0).abs() < 1e-12);
        assert_eq!(log_grid(0.1, 1.0, 1), vec![0.1]);
    }

    #[test]
    fn sweep_produces_row_per_pair() {
        let raw = sample(BenchmarkFunction::Franke2d, 150, SampleMode::UniformRandom, 0).unwrap();
        let split = normalize_and_split(&raw, 0.8, 0).unwrap();
        let rows = sweep_theta(&split, &[1e-3, 1e-2], &[CorrectionLevel::None, CorrectionLevel::FirstMoment]).unwrap();
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn csv_header_matches_row_fields() {
        let cfg = ExperimentConfig {
            test_n: 50,
            levels: vec![CorrectionLevel::None],
            max_search_iters: 2,
            ..ExperimentConfig::new(BenchmarkFunction::Franke2d, 80)
        };
        let rows = run_benchmark(&cfg).unwrap();
        let csv = rows_to_csv(&rows);
        let header_cols = csv.lines().next().unwrap().split(',').count();
        let row_cols = csv.lines().nth(1).unwrap().split(',').count();
        assert_eq!(header_cols, row_cols);
    }
}
