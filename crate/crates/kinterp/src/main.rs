//! Command-line experiment harness.
//!
//! Subcommands: `generate` synthetic datasets, `fit` / `predict` with a
//! persisted model file, `benchmark` for the full seed-averaged pipeline,
//! and `sweep-theta` for validation-error traces over a θ grid.

use clap::{Args, Parser, Subcommand};
use kinterp::benchfn::{add_noise, sample, BenchmarkFunction, NoiseSpec, SampleMode};
use kinterp::dataset::{load_csv, normalize, normalize_and_split, save_csv};
use kinterp::error::{Error, Result};
use kinterp::experiment::{
    log_grid, rows_to_csv, run_benchmark, sweep_theta, ExperimentConfig, Method, ResultRow,
    ThetaSelection,
};
use kinterp::interp::{fit, CorrectionLevel};
use kinterp::kernel::Temperature;
use kinterp::model_io::{SavedModel, SavedModelKind, MODEL_SCHEMA_VERSION};
use kinterp::moment::SolverConfig;
use kinterp::rbf::{rbf_fit, rbf_tune};
use kinterp::temperature::{search_theta, search_theta_mle, CgConfig, ThetaSearchConfig};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kinterp", version, about = "Kernel interpolation with kinetic moment corrections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a benchmark function to a dataset CSV.
    Generate(GenerateArgs),
    /// Fit a model to a training CSV and persist it as JSON.
    Fit(FitArgs),
    /// Predict with a persisted model on a query CSV.
    Predict(PredictArgs),
    /// Run the seed-averaged benchmark pipeline and export a results CSV.
    Benchmark(BenchmarkArgs),
    /// Trace validation RMSE over a log-spaced θ grid per correction level.
    SweepTheta(SweepArgs),
}

#[derive(Args, Clone)]
struct FunctionArgs {
    /// Benchmark function: franke2d, camel, ackley6d, weierstrass, rastrigin.
    #[arg(long)]
    function: Option<String>,
    /// Dimension, for functions that take one (camel, rastrigin).
    #[arg(long)]
    dim: Option<usize>,
    /// Cosine term count for weierstrass.
    #[arg(long, default_value_t = 20)]
    terms: u32,
}

impl FunctionArgs {
    fn resolve(&self) -> Result<BenchmarkFunction> {
        let name = self
            .function
            .as_deref()
            .ok_or_else(|| Error::Config("--function is required (or use --preset)".into()))?;
        let need_dim =
            || self.dim.ok_or_else(|| Error::Config(format!("--function {name} requires --dim")));
        match name {
            "franke2d" => Ok(BenchmarkFunction::Franke2d),
            "camel" => Ok(BenchmarkFunction::Camel { dim: need_dim()? }),
            "ackley6d" => Ok(BenchmarkFunction::Ackley6d),
            "weierstrass" => Ok(BenchmarkFunction::Weierstrass { terms: self.terms }),
            "rastrigin" => Ok(BenchmarkFunction::Rastrigin { dim: need_dim()? }),
            other => Err(Error::Config(format!("unknown function '{other}'"))),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Number of samples.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample on a regular grid instead of uniformly at random.
    #[arg(long)]
    grid: bool,
    /// Multiplicative noise amplitude s; 0 disables noise.
    #[arg(long, default_value_t = 0.0)]
    noise_s: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Training CSV (columns x0..x{D-1},phi).
    #[arg(long)]
    train: PathBuf,
    /// Correction level: 0 none, 1 first moment, 2 self-correction.
    #[arg(long, default_value_t = 2)]
    level: u8,
    /// Fitting method: kinetic or rbf.
    #[arg(long, default_value = "kinetic")]
    method: String,
    /// Fixed θ; only used together with --no-search.
    #[arg(long)]
    theta: Option<f64>,
    /// Skip the θ search and use --theta directly.
    #[arg(long)]
    no_search: bool,
    /// Use the conjugate-gradient optimizer instead of the iterative sweep.
    #[arg(long)]
    mle: bool,
    /// Train/validation split ratio used by the θ search.
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    /// Seed for the split shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relaxation weight of the iterative θ search.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Output model file (JSON).
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `fit`.
    #[arg(long)]
    model: PathBuf,
    /// Query CSV; the phi column is optional and ignored.
    #[arg(long)]
    queries: PathBuf,
    /// Output CSV with one prediction per query row.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated seed list.
    #[arg(long, default_value = "0", value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Comma-separated correction levels for the kinetic method.
    #[arg(long, default_value = "0,1,2", value_delimiter = ',')]
    levels: Vec<u8>,
    /// Comma-separated methods: kinetic, rbf.
    #[arg(long, default_value = "kinetic", value_delimiter = ',')]
    methods: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    noise_s: f64,
    /// Held-out test-set size (fresh noiseless random points).
    #[arg(long, default_value_t = 10_000)]
    test_n: usize,
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    /// Fixed θ; skips the search.
    #[arg(long)]
    theta: Option<f64>,
    /// Use the conjugate-gradient θ optimizer.
    #[arg(long)]
    mle: bool,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Named experiment preset; overrides function/n/seeds/levels/noise.
    /// One of: camel-1d-small, camel-1d, camel-3d, ackley-6d,
    /// franke-levels, franke-noisy.
    #[arg(long)]
    preset: Option<String>,
    /// Results CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON summary with per-group mean/std and correction ratios.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "0,1,2", value_delimiter = ',')]
    levels: Vec<u8>,
    /// Lower θ bound of the log-spaced grid.
    #[arg(long, default_value_t = 1e-4)]
    theta_min: f64,
    /// Upper θ bound; defaults to the variance-based initial guess.
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long, default_value_t = 30)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::SweepTheta(args) => cmd_sweep_theta(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let f = args.function.resolve()?;
    let mode = if args.grid { SampleMode::RegularGrid } else { SampleMode::UniformRandom };
    let mut data = sample(f, args.n, mode, args.seed)?;
    if args.noise_s > 0.0 {
        data = add_noise(&data, &NoiseSpec::new(args.noise_s, args.seed));
    }
    save_csv(&data, &args.out)?;
    println!("wrote {} rows to {}", data.len(), args.out.display());
    Ok(())
}

fn parse_level(level: u8) -> Result<CorrectionLevel> {
    CorrectionLevel::from_u8(level)
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let raw = load_csv(&args.train)?;
    let level = parse_level(args.level)?;
    if args.theta.is_some() != args.no_search {
        return Err(Error::Config(
            "--theta and --no-search must be used together".into(),
        ));
    }

    let (theta, d_typ, trace, transform, train_norm) = if let Some(t) = args.theta {
        let (norm, transform) = normalize(&raw);
        (Temperature::new(t)?, None, None, transform, norm)
    } else {
        let split = normalize_and_split(&raw, args.split_ratio, args.seed)?;
        let res = if args.mle {
            search_theta_mle(&split, level, &CgConfig { max_iters: args.max_iters, ..CgConfig::default() })?
        } else if args.method == "rbf" {
            let (t, _) = rbf_tune(&split)?;
            kinterp::temperature::ThetaSearchResult {
                theta_opt: t,
                theta_trace: Vec::new(),
                d_typ: kinterp::temperature::d_typ(&split.train, 5)?,
                stop_reason: kinterp::temperature::StopReason::MaxIters,
            }
        } else {
            let mut cfg = ThetaSearchConfig::new(level);
            cfg.alpha = args.alpha;
            cfg.max_iters = args.max_iters;
            search_theta(&split, &cfg)?
        };
        // refit on the full normalized dataset at the selected θ
        let (norm, transform) = normalize(&raw);
        (res.theta_opt, Some(res.d_typ), Some(res.theta_trace), transform, norm)
    };

    let kind = match args.method.as_str() {
        "kinetic" => SavedModelKind::Kinetic(fit(&train_norm, theta, level, SolverConfig::default())?),
        "rbf" => SavedModelKind::Rbf(rbf_fit(&train_norm, theta, 0.0)?),
        other => return Err(Error::Config(format!("unknown method '{other}'"))),
    };
    let saved = SavedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        transform,
        d_typ,
        theta_trace: trace,
        kind,
    };
    saved.save(&args.model_out)?;
    println!("theta_opt = {}", theta.get());
    if let Some(d) = d_typ {
        println!("d_typ = {d}");
        println!("theta/d_typ^2 = {}", theta.get() / (d * d));
    }
    println!("model written to {}", args.model_out.display());
    Ok(())
}

/// Load a query CSV: header `x0,...,x{D-1}` with an optional trailing `phi`
/// column, which is ignored.
fn load_queries(path: &Path, dim: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Csv { line: 1, msg: "empty file".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_phi = cols.last() == Some(&"phi");
    let ncols = if has_phi { cols.len() - 1 } else { cols.len() };
    if ncols != dim {
        return Err(Error::QueryDimension { expected: dim, found: ncols });
    }
    for (i, col) in cols[..ncols].iter().enumerate() {
        if *col != format!("x{i}") {
            return Err(Error::Csv { line: 1, msg: format!("expected column x{i}, found '{col}'") });
        }
    }
    let mut points = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Csv {
                line: idx + 1,
                msg: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        for field in &fields[..dim] {
            let v: f64 = field.trim().parse().map_err(|_| Error::Csv {
                line: idx + 1,
                msg: format!("invalid number '{field}'"),
            })?;
            points.push(v);
        }
    }
    Ok(points)
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = SavedModel::load(&args.model)?;
    let dim = model.dim();
    let queries = load_queries(&args.queries, dim)?;
    let mut norm_q = Vec::with_capacity(queries.len());
    for q in queries.chunks_exact(dim) {
        norm_q.extend_from_slice(&model.transform.normalize_point(q));
    }
    let pred_norm = match &model.kind {
        SavedModelKind::Kinetic(m) => m.predict(&norm_q)?,
        SavedModelKind::Rbf(m) => m.predict(&norm_q)?,
    };

    let mut out = String::new();
    for i in 0..dim {
        let _ = write!(out, "x{i},");
    }
    out.push_str("phi\n");
    for (q, p) in queries.chunks_exact(dim).zip(&pred_norm) {
        for x in q {
            let _ = write!(out, "{x},");
        }
        let _ = writeln!(out, "{}", model.transform.denormalize_value(*p));
    }
    std::fs::write(&args.out, out).map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    println!("wrote {} predictions to {}", pred_norm.len(), args.out.display());
    Ok(())
}

fn apply_preset(args: &mut BenchmarkArgs) -> Result<()> {
    let Some(name) = args.preset.clone() else { return Ok(()) };
    let five: Vec<u64> = (0..5).collect();
    match name.as_str() {
        "camel-1d-small" => {
            args.function.function = Some("camel".into());
            args.function.dim = Some(1);
            args.n = Some(100);
            args.seeds = five;
            args.levels = vec![0, 2];
        }
        "camel-1d" => {
            args.function.function = Some("camel".into());
            args.function.dim = Some(1);
            args.n = Some(200);
            args.seeds = five;
            args.levels = vec![0, 2];
        }
        "camel-3d" => {
            args.function.function = Some("camel".into());
            args.function.dim = Some(3);
            args.n = Some(2000);
            args.seeds = (0..3).collect();
            args.levels = vec![0, 2];
        }
        "ackley-6d" => {
            args.function.function = Some("ackley6d".into());
            args.n = Some(2000);
            args.seeds = (0..2).collect();
            args.levels = vec![0, 2];
            args.test_n = 2000;
        }
        "franke-levels" => {
            args.function.function = Some("franke2d".into());
            args.n = Some(2000);
            args.seeds = five;
            args.levels = vec![0, 1, 2];
        }
        "franke-noisy" => {
            args.function.function = Some("franke2d".into());
            args.n = Some(1000);
            args.seeds = five;
            args.levels = vec![2];
            args.methods = vec!["kinetic".into(), "rbf".into()];
            args.noise_s = 0.05;
        }
        other => return Err(Error::Config(format!("unknown preset '{other}'"))),
    }
    Ok(())
}

fn group_stats(rows: &[ResultRow], method: Method, level: u8) -> Option<serde_json::Value> {
    let rmses: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.level == level)
        .map(|r| r.rmse)
        .collect();
    if rmses.is_empty() {
        return None;
    }
    let n = rmses.len() as f64;
    let mean = rmses.iter().sum::<f64>() / n;
    let var = rmses.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Some(json!({
        "method": match method { Method::Kinetic => "kinetic", Method::Rbf => "rbf" },
        "level": level,
        "seeds": rmses.len(),
        "rmse_mean": mean,
        "rmse_std": var.sqrt(),
    }))
}

fn cmd_benchmark(mut args: BenchmarkArgs) -> Result<()> {
    apply_preset(&mut args)?;
    let f = args.function.resolve()?;
    let n = args.n.ok_or_else(|| Error::Config("--n is required (or use --preset)".into()))?;
    if args.seeds.is_empty() {
        return Err(Error::Config("--seeds must be non-empty".into()));
    }

    let mut cfg = ExperimentConfig::new(f, n);
    cfg.seeds = args.seeds.clone();
    cfg.noise_s = args.noise_s;
    cfg.levels = args.levels.iter().map(|&l| parse_level(l)).collect::<Result<_>>()?;
    cfg.methods = args
        .methods
        .iter()
        .map(|m| match m.as_str() {
            "kinetic" => Ok(Method::Kinetic),
            "rbf" => Ok(Method::Rbf),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        })
        .collect::<Result<_>>()?;
    cfg.split_ratio = args.split_ratio;
    cfg.test_n = args.test_n;
    cfg.alpha = args.alpha;
    cfg.max_search_iters = args.max_iters;
    cfg.selection = match (args.theta, args.mle) {
        (Some(t), false) => ThetaSelection::Fixed(t),
        (None, true) => ThetaSelection::Mle,
        (None, false) => ThetaSelection::Present,
        (Some(_), true) => return Err(Error::Config("--theta and --mle are exclusive".into())),
    };

    let rows = run_benchmark(&cfg)?;
    std::fs::write(&args.out, rows_to_csv(&rows)).map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    println!("wrote {} result rows to {}", rows.len(), args.out.display());

    // seed-mean summary with uncorrected/corrected RMSE ratios
    let mut groups = Vec::new();
    for &method in &cfg.methods {
        let levels: &[u8] = match method {
            Method::Kinetic => &args.levels,
            Method::Rbf => &[0],
        };
        for &level in levels {
            if let Some(g) = group_stats(&rows, method, level) {
                groups.push(g);
            }
        }
    }
    let base = kinterp::experiment::mean_rmse(&rows, Method::Kinetic, 0);
    let mut ratios = serde_json::Map::new();
    if let Some(base) = base {
        for &level in &args.levels {
            if level == 0 {
                continue;
            }
            if let Some(m) = kinterp::experiment::mean_rmse(&rows, Method::Kinetic, level) {
                ratios.insert(format!("level{level}"), json!(base / m));
                println!("rmse ratio level0/level{level} = {:.4}", base / m);
            }
        }
    }
    for g in &groups {
        println!(
            "{} level {}: rmse mean {:.6e} std {:.2e}",
            g["method"].as_str().unwrap(),
            g["level"],
            g["rmse_mean"].as_f64().unwrap(),
            g["rmse_std"].as_f64().unwrap(),
        );
    }
    if let Some(path) = &args.summary {
        let summary = json!({
            "schema_version": kinterp::experiment::RESULT_SCHEMA_VERSION,
            "function": f.name(),
            "n": n,
            "noise_s": args.noise_s,
            "groups": groups,
            "rmse_ratio_vs_level0": ratios,
        });
        std::fs::write(path, serde_json::to_string_pretty(&summary)?).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        println!("summary written to {}", path.display());
    }
    Ok(())
}

fn cmd_sweep_theta(args: SweepArgs) -> Result<()> {
    let f = args.function.resolve()?;
    let raw = sample(f, args.n, SampleMode::UniformRandom, args.seed)?;
    let split = normalize_and_split(&raw, args.split_ratio, args.seed)?;
    let theta_max = match args.theta_max {
        Some(t) => t,
        None => kinterp::temperature::theta_initial(&split.train)?.get(),
    };
    if args.theta_min <= 0.0 || theta_max < args.theta_min {
        return Err(Error::Config(format!(
            "invalid theta range [{}, {theta_max}]",
            args.theta_min
        )));
    }
    let grid = log_grid(args.theta_min, theta_max, args.grid_points);
    let levels = args.levels.iter().map(|&l| parse_level(l)).collect::<Result<Vec<_>>>()?;
    let rows = sweep_theta(&split, &grid, &levels)?;

    let mut out = String::from("theta,theta_over_dtyp2,level,rmse\n");
    for (t, t_rel, level, rmse) in &rows {
        let _ = writeln!(out, "{t},{t_rel},{level},{rmse}");
    }
    std::fs::write(&args.out, out).map_err(|source| Error::Io {
        path: args.out.display().to_string(),
        source,
    })?;
    println!("wrote {} trace rows to {}", rows.len(), args.out.display());
    Ok(())
}
