//! Command-line interface. Every command is a pure function of its flags:
//! randomness derives from `--seed`, and results do not depend on
//! `--workers`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lagwin_core::chains::{ar1_chain, toy_adaptive_rwm, SamplerConfig};
use lagwin_core::ci::{ci_classical, ci_fixedb, tail_probability};
use lagwin_core::fixedb::FixedBQuantileTable;
use lagwin_core::lagwindow::{gamma_n_sq, Bandwidth};
use lagwin_core::mercer::{self, nystrom_decompose};
use lagwin_core::seed::{derive_seed, label};
use lagwin_core::{KernelId, WeightKernel};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    coverage_study, default_deltas, rate_study, toy_multilimit_study, CoverageConfig, ModelSpec, RateConfig,
    ToyStudyConfig,
};
use crate::io::{self, read_quantile_table, read_series, write_cdf, write_chain, write_csv, write_json, write_quantile_table};
use crate::manifest::{RunManifest, FILE_NAME as MANIFEST};
use crate::parallel;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const OUT_DIR_ENV: &str = "LAGWIN_OUT_DIR";
/// Inputs shorter than this are rejected by `estimate`.
pub const MIN_SERIES: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "lagwin", version, about = "Lag-window variance estimation and fixed-b inference for MCMC output")]
pub struct Cli {
    /// Base seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: all cores). Does not affect results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-b critical values (CSV + JSON metadata).
    Quantiles(QuantilesArgs),
    /// Γ²ₙ, ESS and a confidence interval for a series read from CSV.
    Estimate(EstimateArgs),
    /// Coverage study of classical and fixed-b intervals.
    Coverage(CoverageArgs),
    /// Convergence rate of Γ²ₙ on normalized AR(1) chains.
    Rate(RateArgs),
    /// Multi-limit study of the adaptive toy sampler.
    Toy(ToyArgs),
    /// CDF of the fixed-b limit T on a grid.
    Cdf(CdfArgs),
    /// Nyström eigenvalues of the centred kernel ρ⋆.
    Eigs(EigsArgs),
    /// Exports one reference chain as a single-column CSV.
    Chain(ChainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Bartlett,
    Quadratic,
    /// `1 − |u|³`: admissible as a weight, but ρ⋆ is indefinite.
    Cubic,
}

impl KernelArg {
    pub fn kernel(self) -> Result<WeightKernel> {
        Ok(match self {
            KernelArg::Bartlett => WeightKernel::bartlett(),
            KernelArg::Quadratic => WeightKernel::quadratic(),
            KernelArg::Cubic => WeightKernel::custom("cubic", |u: f64| 1.0 - u.abs().powi(3))?,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelArg::Bartlett => "bartlett",
            KernelArg::Quadratic => "quadratic",
            KernelArg::Cubic => "cubic",
        }
    }
}

/// Studies persist kernels by id, so only the built-in kernels qualify.
fn builtin_id(k: KernelArg) -> Result<KernelId> {
    match k {
        KernelArg::Bartlett => Ok(KernelId::Bartlett),
        KernelArg::Quadratic => Ok(KernelId::Quadratic),
        KernelArg::Cubic => Err(Error::Config("studies use the bartlett or quadratic kernel".into())),
    }
}

fn kernel_arg(id: KernelId) -> Result<KernelArg> {
    match id {
        KernelId::Bartlett => Ok(KernelArg::Bartlett),
        KernelId::Quadratic => Ok(KernelArg::Quadratic),
        KernelId::Custom => Err(Error::Config("custom kernels cannot be used here".into())),
    }
}

/// Seed of the critical-value table for `kernel`; shared by `quantiles` and
/// `coverage`, so both compute the same table from the same `--seed`.
pub fn table_seed(base: u64, kernel: &str) -> u64 {
    derive_seed(base, &[label("table"), label(kernel)])
}

pub fn table_file(kernel: &str) -> String {
    format!("quantiles_{kernel}.csv")
}

#[derive(Debug, Args)]
pub struct QuantilesArgs {
    #[arg(long, value_enum, default_value = "bartlett")]
    pub kernel: KernelArg,
    /// Tail probabilities α (critical value t with P(T > t) = α).
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.025")]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Numeric CSV: one column, or several with `--column`.
    #[arg(long)]
    pub input: PathBuf,
    /// Column name, for multi-column input.
    #[arg(long)]
    pub column: Option<String>,
    /// Bandwidth: an integer, `npow:δ`, or `n` (fixed-b).
    #[arg(long, default_value = "npow:0.5")]
    pub cn: String,
    #[arg(long, value_enum, default_value = "bartlett")]
    pub kernel: KernelArg,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Critical-value table (required with `--cn n`).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Iid,
    Ar1,
    Toy,
    Logistic,
    Poisson,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Post-burn-in length of each chain.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub burn_in: usize,
    /// Replications (K).
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Classical exponents δ (`cₙ = n^δ`).
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "bartlett")]
    pub classical_kernel: KernelArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bartlett,quadratic")]
    pub fixedb_kernels: Vec<KernelArg>,
    /// Existing critical-value tables; missing ones are computed and saved
    /// to the output directory.
    #[arg(long, value_delimiter = ',')]
    pub tables: Vec<PathBuf>,
    /// Draws for computed tables.
    #[arg(long, default_value_t = 1_000_000)]
    pub table_draws: usize,
    /// AR(1) coefficient (`--model ar1`).
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Target acceptance rate (`--model toy`).
    #[arg(long, default_value_t = 0.23)]
    pub target_rate: f64,
    /// Observations / dimension / prior scale (`--model logistic`).
    #[arg(long, default_value_t = 50)]
    pub n_obs: usize,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 20.0)]
    pub prior_scale: f64,
    /// Coefficient reported (`--model logistic`).
    #[arg(long, default_value_t = 0)]
    pub coordinate: usize,
    /// Groups and units per group (`--model poisson`).
    #[arg(long, default_value_t = 5)]
    pub n_e: usize,
    #[arg(long, default_value_t = 10)]
    pub n_p: usize,
    /// Seed of the synthetic data set (logistic, poisson).
    #[arg(long, default_value_t = 1)]
    pub data_seed: u64,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Chain lengths; geometric, each dividing the largest.
    #[arg(long, value_delimiter = ',', default_value = "4096,8192,16384,32768,65536")]
    pub n_grid: Vec<usize>,
    /// Bandwidth rules.
    #[arg(long, value_delimiter = ',', default_value = "npow:0.3333333333333333,npow:0.6666666666666666,n")]
    pub rules: Vec<String>,
    /// Replications (R).
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "bartlett")]
    pub kernel: KernelArg,
    /// Size of the χ² reference sample.
    #[arg(long, default_value_t = 100_000)]
    pub reference_draws: usize,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value_t = 2_000_000)]
    pub n_total: usize,
    #[arg(long, default_value_t = 100_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 0.23)]
    pub target_rate: f64,
    /// Record θ every this many iterations.
    #[arg(long, default_value_t = 1000)]
    pub trace_every: usize,
    /// Maximum distance of a terminal θ from a root.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bartlett")]
    pub kernel: Vec<KernelArg>,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    /// Grid `lo,hi,points`.
    #[arg(long, value_delimiter = ',', default_value = "-10,10,401")]
    pub grid: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    #[arg(long, value_enum, default_value = "bartlett")]
    pub kernel: KernelArg,
    /// Nyström grid size.
    #[arg(long, default_value_t = mercer::DEFAULT_GRID)]
    pub grid: usize,
    /// Eigenvalues printed.
    #[arg(long, default_value_t = 10)]
    pub show: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainModel {
    Ar1,
    Toy,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_enum, default_value = "ar1")]
    pub model: ChainModel,
    #[arg(long, default_value_t = 65_536)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.23)]
    pub target_rate: f64,
    /// Starting proposal width (`--model toy`).
    #[arg(long)]
    pub theta0: Option<f64>,
    /// File name inside the output directory.
    #[arg(long, default_value = "chain.csv")]
    pub file: String,
}

/// Runs the parsed command on a pool of `--workers` threads.
pub fn run(cli: Cli) -> Result<()> {
    let pool = parallel::pool(cli.workers)?;
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let out = cli.out.as_path();
    let mut manifest = match &cli.command {
        Command::Quantiles(a) => quantiles(a, cli.seed, out)?,
        Command::Estimate(a) => return estimate(a),
        Command::Coverage(a) => coverage(a, cli.seed, out)?,
        Command::Rate(a) => rate(a, cli.seed, out)?,
        Command::Toy(a) => toy(a, cli.seed, out)?,
        Command::Cdf(a) => cdf(a, cli.seed, out)?,
        Command::Eigs(a) => eigs(a, cli.seed, out)?,
        Command::Chain(a) => chain(a, cli.seed, out)?,
    };
    manifest.duration_secs = started.elapsed().as_secs_f64();
    manifest.write(&out.join(MANIFEST))
}

fn file_names(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect()
}

#[derive(Serialize)]
struct QuantilesConfig<'a> {
    kernel: &'a str,
    levels: &'a [f64],
    draws: usize,
    table_seed: u64,
}

fn compute_table(kernel: KernelArg, levels: &[f64], draws: usize, base: u64, out: &Path) -> Result<(PathBuf, FixedBQuantileTable)> {
    let seed = table_seed(base, kernel.name());
    let table = parallel::quantile_table(&kernel.kernel()?, levels, draws, seed)?;
    let path = out.join(table_file(kernel.name()));
    write_quantile_table(&path, &table)?;
    Ok((path, table))
}

fn quantiles(a: &QuantilesArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    let (path, table) = compute_table(a.kernel, &a.levels, a.draws, seed, out)?;
    for r in &table.rows {
        println!("{} alpha={} t={:.4} se={:.4}", a.kernel.name(), r.level, r.critical_value, r.mc_se);
    }
    let config = QuantilesConfig { kernel: a.kernel.name(), levels: &a.levels, draws: a.draws, table_seed: table.seed };
    let mut m = RunManifest::new("quantiles", &config, seed)?;
    m.outputs = file_names(&[path.clone(), io::sidecar(&path)]);
    Ok(m)
}

#[derive(Debug, Serialize)]
struct EstimateOutput {
    n: usize,
    c_n: usize,
    kernel: &'static str,
    mean: f64,
    gamma0: f64,
    gamma_sq: f64,
    ess: Option<f64>,
    mc_error: f64,
    method: String,
    level: f64,
    critical_value: f64,
    halfwidth: f64,
    lower: f64,
    upper: f64,
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let bandwidth: Bandwidth = a.cn.parse()?;
    let x = read_series(&a.input, a.column.as_deref())?;
    if x.len() < MIN_SERIES {
        return Err(Error::Input(format!(
            "{}: need at least {MIN_SERIES} values, got {}",
            a.input.display(),
            x.len()
        )));
    }
    let kernel = a.kernel.kernel()?;
    let n = x.len();
    let c_n = bandwidth.resolve(n);
    let ci = if c_n == n {
        let path = a
            .table
            .as_ref()
            .ok_or_else(|| Error::Config("`--cn n` needs a critical-value table (`--table`)".into()))?;
        let table = read_quantile_table(path)?;
        if table.kernel_id != kernel.id() {
            return Err(Error::Config(format!("table is for kernel {}, not {}", table.kernel_id, kernel.id())));
        }
        ci_fixedb(&x, &kernel, a.level, &table)?
    } else {
        ci_classical(&x, c_n, &kernel, a.level)?
    };
    let est = ci.estimate;
    let o = EstimateOutput {
        n,
        c_n,
        kernel: a.kernel.name(),
        mean: est.mean,
        gamma0: est.gamma0,
        gamma_sq: est.gamma_sq,
        ess: est.ess,
        mc_error: est.mc_error()?,
        method: ci.method.to_string(),
        level: a.level,
        critical_value: ci.critical_value_used,
        halfwidth: ci.halfwidth,
        lower: ci.lower,
        upper: ci.upper,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&o).expect("plain struct serializes"));
    } else {
        println!("n              {}", o.n);
        println!("c_n            {}", o.c_n);
        println!("kernel         {}", o.kernel);
        println!("mean           {}", o.mean);
        println!("gamma0         {}", o.gamma0);
        println!("gamma_sq       {}", o.gamma_sq);
        println!("ess            {}", o.ess.map_or("-".to_string(), |e| e.to_string()));
        println!("mc_error       {}", o.mc_error);
        println!("method         {}", o.method);
        println!("level          {}", o.level);
        println!("critical_value {}", o.critical_value);
        println!("halfwidth      {}", o.halfwidth);
        println!("interval       [{}, {}]", o.lower, o.upper);
    }
    Ok(())
}

fn coverage(a: &CoverageArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    let model = match a.model {
        ModelArg::Iid => ModelSpec::Iid,
        ModelArg::Ar1 => ModelSpec::Ar1 { rho: a.rho },
        ModelArg::Toy => ModelSpec::Toy { target_rate: a.target_rate },
        ModelArg::Logistic => ModelSpec::Logistic {
            n_obs: a.n_obs,
            dim: a.dim,
            prior_scale: a.prior_scale,
            data_seed: a.data_seed,
            coordinate: a.coordinate,
        },
        ModelArg::Poisson => ModelSpec::Poisson { n_e: a.n_e, n_p: a.n_p, data_seed: a.data_seed },
    };
    let mut config = CoverageConfig::new(model, a.n + a.burn_in, a.burn_in, a.reps, seed);
    config.level = a.level;
    config.deltas = a.deltas.clone().unwrap_or_else(default_deltas);
    config.classical_kernel = builtin_id(a.classical_kernel)?;
    config.fixedb_kernels = a.fixedb_kernels.iter().map(|&k| builtin_id(k)).collect::<Result<_>>()?;
    config.validate()?;

    let tail = tail_probability(a.level);
    let mut tables = a.tables.iter().map(|p| read_quantile_table(p)).collect::<Result<Vec<_>>>()?;
    let mut outputs = Vec::new();
    let mut table_files: Vec<String> = a.tables.iter().map(|p| p.display().to_string()).collect();
    for &id in &config.fixedb_kernels {
        if tables.iter().any(|t| t.kernel_id == id && t.critical_value(tail).is_ok()) {
            continue;
        }
        let (path, table) = compute_table(kernel_arg(id)?, &[tail], a.table_draws, seed, out)?;
        outputs.extend(file_names(&[path.clone(), io::sidecar(&path)]));
        table_files.push(path.display().to_string());
        tables.push(table);
    }

    let report = coverage_study(&config, &tables)?;
    let csv = out.join("coverage.csv");
    write_csv(&csv, &report.rows)?;
    let json = out.join("coverage.json");
    write_json(&json, &report)?;
    outputs.extend(file_names(&[csv, json]));
    for r in &report.rows {
        println!(
            "{:<9} {:<9} delta={:<6} coverage={:.3} halfwidth={:.4} flags={}",
            r.method.as_str(),
            r.kernel.as_str(),
            r.delta,
            r.coverage,
            r.mean_halfwidth,
            r.miss_flags
        );
    }
    let mut m = RunManifest::new("coverage", &config, seed)?;
    m.outputs = outputs;
    m.extra = json!({
        "truth": report.truth,
        "truth_source": report.truth_source,
        "tables": table_files,
        "replication_seeds": report.replication_seeds,
    });
    Ok(m)
}

fn rate(a: &RateArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    let mut config = RateConfig::new(a.rho, a.n_grid.clone(), a.reps, seed);
    config.rules = a.rules.iter().map(|r| r.parse()).collect::<lagwin_core::Result<_>>()?;
    config.kernel = builtin_id(a.kernel)?;
    config.reference_draws = a.reference_draws;
    let report = rate_study(&config)?;
    let csv = out.join("rate.csv");
    write_csv(&csv, &report.rows)?;
    for r in &report.rows {
        let w = r.wasserstein.map(|w| format!(" d1={w:.5}")).unwrap_or_default();
        println!("{:<24} n={:<7} rmse={:.5} slope={:.3}{w}", r.rule, r.n, r.rmse, r.slope_rule);
    }
    let mut m = RunManifest::new("rate", &config, seed)?;
    m.outputs = file_names(&[csv]);
    m.extra = json!({ "reference_seed": report.reference_seed });
    Ok(m)
}

fn toy(a: &ToyArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    let mut config = ToyStudyConfig::new(a.seeds, seed);
    config.sampler.n_total = a.n_total;
    config.sampler.burn_in = a.burn_in;
    config.sampler.target_rate = a.target_rate;
    config.sampler.trace_every = a.trace_every;
    config.tolerance = a.tolerance;
    let report = toy_multilimit_study(&config)?;
    let runs = out.join("toy_runs.csv");
    let clusters = out.join("toy_clusters.csv");
    let traces = out.join("toy_traces.csv");
    write_csv(&runs, &report.runs)?;
    write_csv(&clusters, &report.clusters)?;
    write_csv(&traces, &report.traces)?;
    println!("roots of a(theta) = {}: {:?}", a.target_rate, report.roots);
    for c in &report.clusters {
        println!("root {:.4}: {} runs, mean gamma_sq {:.4} (se {:.4})", c.root, c.count, c.mean_gamma_sq, c.se_gamma_sq);
    }
    println!(
        "all within {}: {}; occupied roots: {}; separated: {}",
        a.tolerance,
        report.all_within_tolerance(),
        report.occupied(),
        report.clusters_separated()
    );
    let mut m = RunManifest::new("toy", &config, seed)?;
    m.outputs = file_names(&[runs, clusters, traces]);
    m.extra = json!({
        "roots": report.roots,
        "seeds": report.runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
    });
    Ok(m)
}

#[derive(Serialize)]
struct CdfConfig<'a> {
    kernels: Vec<&'a str>,
    draws: usize,
    grid: &'a [f64],
    seeds: Vec<u64>,
}

fn cdf(a: &CdfArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    let [lo, hi, points] = a.grid[..] else {
        return Err(Error::Config("--grid takes lo,hi,points".into()));
    };
    if !(lo < hi) || points < 2.0 || points.fract() != 0.0 {
        return Err(Error::Config(format!("bad grid {lo},{hi},{points}")));
    }
    let m = points as usize;
    let grid: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let mut paths = Vec::new();
    let mut seeds = Vec::new();
    for &k in &a.kernel {
        let s = derive_seed(seed, &[label("cdf"), label(k.name())]);
        let cdf = parallel::cdf_table(&k.kernel()?, &grid, a.draws, s)?;
        let path = out.join(format!("cdf_{}.csv", k.name()));
        write_cdf(&path, &cdf)?;
        println!("{}: {}", k.name(), path.display());
        paths.push(path);
        seeds.push(s);
    }
    let config = CdfConfig { kernels: a.kernel.iter().map(|k| k.name()).collect(), draws: a.draws, grid: &a.grid, seeds };
    let mut man = RunManifest::new("cdf", &config, seed)?;
    man.outputs = file_names(&paths);
    Ok(man)
}

#[derive(Serialize)]
struct EigRow {
    index: usize,
    eigenvalue: f64,
}

fn eigs(a: &EigsArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    let kernel = a.kernel.kernel()?;
    let d = nystrom_decompose(&kernel, a.grid, mercer::DEFAULT_TRACE_FRACTION)?;
    let significant: Vec<f64> = d.eigenvalues.iter().copied().filter(|&v| v > 1e-8).collect();
    println!("kernel {} grid {}: {} eigenvalues above 1e-8", a.kernel.name(), a.grid, significant.len());
    for (i, v) in d.eigenvalues.iter().take(a.show).enumerate() {
        println!("{:>4} {:.10}", i + 1, v);
    }
    println!("retained sum {:.10} (positive trace {:.10})", d.retained_sum(), d.positive_trace);
    let path = out.join(format!("eigs_{}.csv", a.kernel.name()));
    write_csv(&path, d.eigenvalues.iter().enumerate().map(|(i, &eigenvalue)| EigRow { index: i + 1, eigenvalue }))?;
    let mut m = RunManifest::new("eigs", &json!({ "kernel": a.kernel.name(), "grid": a.grid }), seed)?;
    m.outputs = file_names(&[path]);
    m.extra = json!({ "positive_trace": d.positive_trace, "min_eigenvalue": d.min_eigenvalue });
    Ok(m)
}

fn chain(a: &ChainArgs, seed: u64, out: &Path) -> Result<RunManifest> {
    if a.file.contains(['/', '\\']) {
        return Err(Error::Config("--file is a name inside the output directory".into()));
    }
    let s = derive_seed(seed, &[label("chain"), label(model_name(a.model))]);
    let n_total = a.n + a.burn_in;
    let (run, config) = match a.model {
        ChainModel::Ar1 => {
            let mut run = ar1_chain(a.rho, n_total, s)?;
            run.h_path.drain(..a.burn_in);
            run.burn_in = a.burn_in;
            (run, json!({ "model": "ar1", "rho": a.rho, "n": a.n, "burn_in": a.burn_in, "seed": s }))
        }
        ChainModel::Toy => {
            let mut c = SamplerConfig::toy(n_total, a.burn_in);
            c.target_rate = a.target_rate;
            c.initial_theta = a.theta0;
            c.trace_every = 1000.min(n_total);
            let run = toy_adaptive_rwm(&c, s)?;
            (run, serde_json::to_value(&c).map_err(|e| Error::Input(e.to_string()))?)
        }
    };
    let path = out.join(&a.file);
    write_chain(&path, &run, config.clone())?;
    let est = gamma_n_sq(&run.h_path, Bandwidth::Power(1.0 / 3.0).resolve(run.h_path.len()), &WeightKernel::bartlett())?;
    println!("{} values written to {} (gamma_sq at n^(1/3): {:.4})", run.h_path.len(), path.display(), est.gamma_sq);
    let mut m = RunManifest::new("chain", &config, seed)?;
    m.outputs = file_names(&[path.clone(), io::sidecar(&path)]);
    Ok(m)
}

fn model_name(m: ChainModel) -> &'static str {
    match m {
        ChainModel::Ar1 => "ar1",
        ChainModel::Toy => "toy",
    }
}
