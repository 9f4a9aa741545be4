//! Command-line front end. Every subcommand builds a JSON report and,
//! where there is one, a primary CSV table. Without `--out` the report (or
//! the table, with `--format csv`) goes to stdout; with `--out` both are
//! written into that directory.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cv::{cross_validate, thread_pool, CvOptions, CvReport, Method};
use super::data::{ingest_csv, standardize, synth_blocks, write_matrix_csv, SynthSpec};
use crate::error::{Error, Result};
use crate::model::{estimate_logz_is_with_dof, exact_logz_2d, log_bound, Kind, Partition, PenaltyConfig};
use crate::pdcore::{SampleStats, SymMatrix};
use crate::sampler::{gibbs_chains, ChainConfig, ChainSummary};
use crate::solver::{duality_gap, fit_weighted, kkt_residual, tikhonov, weights_for, PenaltyScale, SolverOptions};
use crate::structure::{search, SearchOptions, Strategy};

#[derive(Debug, Parser)]
#[command(name = "blockprec", version, about = "Sparse precision estimation with block-structured priors")]
struct Cli {
    /// Random seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file with solver, search, cv and chain settings.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Directory for report.json and CSV tables.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// What goes to stdout when `--out` is not given.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a precision matrix with fixed penalties and partition.
    Estimate(EstimateArgs),
    /// Learn the block structure and the precision matrix.
    Search(SearchArgs),
    /// Gibbs sampling of the prior; reports mean absolute entries.
    Sample(SampleArgs),
    /// Closed-form upper bound on the log normalizer.
    Bound(BoundArgs),
    /// Importance-sampling log normalizer, plus the exact value in 2-D.
    Logz(LogzArgs),
    /// Cross-validated comparison of estimators.
    Cv(CvArgs),
    /// Generate synthetic data with planted groups.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct Penalties {
    #[arg(long, default_value_t = 1.0)]
    lambda_d: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_1: f64,
    #[arg(long, default_value_t = 50.0)]
    lambda_0: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_0: f64,
}

impl Penalties {
    fn config(&self) -> Result<PenaltyConfig> {
        PenaltyConfig::new(self.lambda_d, self.lambda_1, self.lambda_0, self.alpha_0)
    }
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Numeric CSV, one row per sample.
    #[arg(long, value_name = "CSV")]
    data: Option<PathBuf>,
    /// The data file starts with a header row.
    #[arg(long)]
    header: bool,
    /// Sample covariance matrix as CSV, instead of `--data`.
    #[arg(long, value_name = "CSV", conflicts_with = "data")]
    cov: Option<PathBuf>,
    /// Sample count behind `--cov`.
    #[arg(long, default_value_t = 100)]
    n: usize,
}

impl DataArgs {
    fn stats(&self) -> Result<SampleStats> {
        match (&self.data, &self.cov) {
            (Some(path), _) => Ok(standardize(&ingest_csv(path, self.header)?)?.1),
            (None, Some(path)) => {
                let rows = ingest_csv(path, self.header)?.rows;
                SampleStats::from_scatter(self.n, SymMatrix::from_rows(&rows)?)
            }
            (None, None) => Err(Error::InvalidInput("one of --data or --cov is required".into())),
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Closed-form `(S + λI)^{-1}` instead of a penalized fit.
    #[arg(long, value_name = "LAMBDA")]
    tikhonov: Option<f64>,
    #[arg(long, default_value = "gl1")]
    kind: Kind,
    /// Comma-separated group labels; singletons by default.
    #[arg(long, value_parser = parse_partition)]
    partition: Option<Partition>,
    #[command(flatten)]
    penalties: Penalties,
    /// Read penalties as prior rates or as objective weights.
    #[arg(long, value_enum, default_value_t = Scale::Prior)]
    scale: Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scale {
    Prior,
    Objective,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    input: DataArgs,
    /// One of gl1-ug, gl1-ue, gl12-ug, gl12-ue; overrides --kind/--strategy.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value = "gl1")]
    kind: Kind,
    #[arg(long, default_value = "exhaustive")]
    strategy: Strategy,
    #[arg(long)]
    max_splits: Option<usize>,
    #[command(flatten)]
    penalties: Penalties,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_parser = parse_partition)]
    partition: Partition,
    #[arg(long, default_value = "gl1")]
    kind: Kind,
    #[command(flatten)]
    penalties: Penalties,
    #[arg(long, default_value_t = 5)]
    chains: usize,
    /// Total sweeps per chain including burn-in.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    random_order: bool,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    dim: Option<usize>,
    /// Group labels; one group of size `--dim` by default.
    #[arg(long, value_parser = parse_partition)]
    partition: Option<Partition>,
    #[arg(long, default_value = "gl1")]
    kind: Kind,
    #[command(flatten)]
    penalties: Penalties,
}

impl BoundArgs {
    fn partition(&self) -> Result<Partition> {
        match (&self.partition, self.dim) {
            (Some(p), Some(d)) if p.dim() != d => Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            }),
            (Some(p), _) => Ok(p.clone()),
            (None, Some(d)) if d > 0 => Ok(Partition::single_group(d)),
            _ => Err(Error::InvalidInput("give --dim or --partition".into())),
        }
    }
}

#[derive(Debug, Args)]
struct LogzArgs {
    #[command(flatten)]
    target: BoundArgs,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Wishart proposal degrees of freedom; the dimension by default.
    #[arg(long)]
    dof: Option<f64>,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Comma-separated: T, IL1, GL12-k, GL1-ug, GL1-ue, GL12-ug, GL12-ue.
    #[arg(long, default_value = "T,IL1,GL1-ue")]
    methods: String,
    /// Known partition for GL12-k.
    #[arg(long, value_parser = parse_partition)]
    partition: Option<Partition>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Comma-separated group sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    groups: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    within: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

fn parse_partition(s: &str) -> std::result::Result<Partition, String> {
    let labels = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad group label `{t}`")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Partition::from_labels(&labels).map_err(|e| e.to_string())
}

/// Settings read from `--config`. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub solver: SolverOptions,
    pub search: SearchOptions,
    pub cv: CvOptions,
    pub chain: ChainConfig,
}

/// A finished command: the JSON report and an optional named CSV table.
struct Output {
    report: Value,
    tables: Vec<(&'static str, String)>,
}

/// Runs the command line in `argv` (program name first) and returns the
/// exit code: 0 on success, 1 for usage or input errors, 2 for numerical
/// failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| run(&cli)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => serde_json::from_str::<RunConfig>(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    cfg.search.solver.scale = PenaltyScale::Prior;
    let out = match &cli.command {
        Command::Estimate(a) => estimate(a, &cfg),
        Command::Search(a) => run_search(a, &cfg),
        Command::Sample(a) => sample(a, &cfg, seed),
        Command::Bound(a) => bound(a),
        Command::Logz(a) => logz(a, seed),
        Command::Cv(a) => cv(a, &cfg, seed),
        Command::Synth(a) => synth(a, seed),
    }?;
    emit(cli, &out)
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    let report = serde_json::to_string_pretty(&out.report)? + "\n";
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.json"), &report)?;
            for (name, body) in &out.tables {
                fs::write(dir.join(name), body)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match (cli.format, out.tables.first()) {
                (Format::Csv, Some((_, body))) => stdout.write_all(body.as_bytes())?,
                (Format::Csv, None) => stdout.write_all(flat_csv(&out.report)?.as_bytes())?,
                (Format::Json, _) => stdout.write_all(report.as_bytes())?,
            }
        }
    }
    Ok(())
}

/// Scalar fields of a JSON object as a two-line CSV.
fn flat_csv(v: &Value) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fields: Vec<(&String, &Value)> = v
        .as_object()
        .map(|o| o.iter().filter(|(_, x)| x.is_number() || x.is_string() || x.is_boolean()).collect())
        .unwrap_or_default();
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(fields.iter().map(|(k, _)| k.as_str())).map_err(io)?;
    w.write_record(fields.iter().map(|(_, x)| match x {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }))
    .map_err(io)?;
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?)
        .map_err(|e| Error::Invariant(e.to_string()))
}

fn matrix_csv(m: &SymMatrix) -> Result<String> {
    let mut buf = Vec::new();
    write_matrix_csv(m, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Invariant(e.to_string()))
}

fn estimate(a: &EstimateArgs, cfg: &RunConfig) -> Result<Output> {
    let stats = a.input.stats()?;
    if let Some(lam) = a.tikhonov {
        if !(lam > 0.0) {
            return Err(Error::InvalidInput(format!("--tikhonov must be positive, got {lam}")));
        }
        let omega = tikhonov(&stats.scatter, lam)?;
        return Ok(Output {
            report: json!({ "method": "tikhonov", "lambda": lam, "n": stats.n, "dim": stats.dim, "omega": omega }),
            tables: vec![("omega.csv", matrix_csv(&omega)?)],
        });
    }
    let c = a.penalties.config()?;
    let p = a.partition.clone().unwrap_or_else(|| Partition::singletons(stats.dim));
    if p.dim() != stats.dim {
        return Err(Error::DimensionMismatch {
            expected: stats.dim,
            got: p.dim(),
        });
    }
    let scale = match a.scale {
        Scale::Prior => PenaltyScale::Prior,
        Scale::Objective => PenaltyScale::Objective,
    };
    let opts = cfg.solver.clone().with_scale(scale);
    let w = weights_for(a.kind, &p, &c, scale, stats.n)?;
    let fit = fit_weighted(&stats.scatter, &w, &opts, None)?;
    let kkt = kkt_residual(&fit.omega, &stats.scatter, &w);
    let gap = duality_gap(&fit.omega, &fit.sigma, &stats.scatter, &w);
    Ok(Output {
        report: json!({
            "method": a.kind,
            "partition": p,
            "penalties": c,
            "scale": scale,
            "n": stats.n,
            "dim": stats.dim,
            "iterations": fit.iterations,
            "duality_gap": gap,
            "kkt_residual": kkt,
            "objective": fit.objective,
            "omega": fit.omega,
        }),
        tables: vec![("omega.csv", matrix_csv(&fit.omega)?)],
    })
}

fn run_search(a: &SearchArgs, cfg: &RunConfig) -> Result<Output> {
    let (kind, strategy) = match &a.method {
        Some(m) => match Method::parse(m, None)? {
            Method::Search { kind, strategy } => (kind, strategy),
            other => {
                return Err(Error::InvalidInput(format!(
                    "`{}` is not a structure search method",
                    other.name()
                )))
            }
        },
        None => (a.kind, a.strategy),
    };
    let stats = a.input.stats()?;
    let c = a.penalties.config()?;
    let mut opts = cfg.search.clone();
    if let Some(m) = a.max_splits {
        opts.max_splits = m;
    }
    let report = search(&stats, &c, kind, strategy, &opts)?;
    let omega = matrix_csv(&report.final_omega)?;
    Ok(Output {
        report: serde_json::to_value(&report)?,
        tables: vec![("omega.csv", omega)],
    })
}

fn sample(a: &SampleArgs, cfg: &RunConfig, seed: u64) -> Result<Output> {
    let c = a.penalties.config()?;
    let mut chain = cfg.chain.clone();
    chain.seed = seed;
    chain.n_sweeps = a.sweeps.unwrap_or(chain.n_sweeps);
    chain.burn_in = a.burn_in.unwrap_or(chain.burn_in);
    chain.thin = a.thin.unwrap_or(chain.thin);
    chain.random_order |= a.random_order;
    if a.chains == 0 {
        return Err(Error::InvalidInput("--chains must be at least 1".into()));
    }
    let chains = gibbs_chains(a.kind, &a.partition, &c, &chain, a.chains)?;
    let pooled = ChainSummary::pool(&chains)?;
    let (within, between) = pooled.within_between();
    let table = matrix_csv(&pooled.mean_abs)?;
    Ok(Output {
        report: json!({
            "kind": a.kind,
            "partition": a.partition,
            "penalties": c,
            "chain": chain,
            "overall_mean_diag": pooled.overall_mean_diag(),
            "within_mean_abs": within,
            "between_mean_abs": between,
            "pooled": pooled,
            "chains": chains,
        }),
        tables: vec![("mean_abs.csv", table)],
    })
}

fn bound(a: &BoundArgs) -> Result<Output> {
    let p = a.partition()?;
    let c = a.penalties.config()?;
    Ok(Output {
        report: json!({
            "kind": a.kind,
            "partition": p,
            "penalties": c,
            "log_bound": log_bound(a.kind, &p, &c),
        }),
        tables: Vec::new(),
    })
}

fn logz(a: &LogzArgs, seed: u64) -> Result<Output> {
    let p = a.target.partition()?;
    let c = a.target.penalties.config()?;
    let kind = a.target.kind;
    let dof = a.dof.unwrap_or(p.dim() as f64);
    let est = estimate_logz_is_with_dof(&p, &c, kind, a.samples, seed, dof)?;
    let exact = if p.dim() == 2 && (c.lambda_d - c.lambda_1).abs() <= 1e-12 * c.lambda_1 {
        Some(exact_logz_2d(&c, p.same_group(0, 1))?)
    } else {
        None
    };
    Ok(Output {
        report: json!({
            "kind": kind,
            "partition": p,
            "penalties": c,
            "seed": seed,
            "logz_hat": est.logz_hat,
            "std_err": est.std_err,
            "ess": est.ess,
            "n_samples": est.n_samples,
            "dof": est.dof,
            "log_bound": log_bound(kind, &p, &c),
            "exact_logz": exact,
        }),
        tables: Vec::new(),
    })
}

fn cv(a: &CvArgs, cfg: &RunConfig, seed: u64) -> Result<Output> {
    let data = match (&a.input.data, &a.input.cov) {
        (Some(path), None) => ingest_csv(path, a.input.header)?,
        _ => return Err(Error::InvalidInput("cv needs --data".into())),
    };
    let methods = a
        .methods
        .split(',')
        .map(|m| Method::parse(m, a.partition.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let mut opts = cfg.cv.clone();
    opts.seed = seed;
    opts.folds = a.folds.unwrap_or(opts.folds);
    opts.grid_points = a.grid_points.unwrap_or(opts.grid_points);
    let report = cross_validate(&data, &methods, &opts)?;
    let table = cv_table(&report)?;
    Ok(Output {
        report: serde_json::to_value(&report)?,
        tables: vec![("cv.csv", table)],
    })
}

fn cv_table(r: &CvReport) -> Result<String> {
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "fold", "test_ll", "lambda_d", "lambda_1", "lambda_0"]).map_err(io)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
    for m in &r.methods {
        for (f, ll) in m.test_ll.iter().enumerate() {
            let sel = m.selected[f];
            w.write_record([
                m.method.clone(),
                (f + 1).to_string(),
                opt(*ll),
                opt(sel.map(|s| s.lambda_d)),
                opt(sel.and_then(|s| s.lambda_1)),
                opt(sel.and_then(|s| s.lambda_0)),
            ])
            .map_err(io)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?)
        .map_err(|e| Error::Invariant(e.to_string()))
}

fn synth(a: &SynthArgs, seed: u64) -> Result<Output> {
    let spec = SynthSpec {
        groups: a.groups.clone(),
        n: a.n,
        within_strength: a.within,
        noise: a.noise,
        seed,
    };
    let (data, planted, omega) = synth_blocks(&spec)?;
    let mut buf = Vec::new();
    data.write_csv_to(&mut buf)?;
    let table = String::from_utf8(buf).map_err(|e| Error::Invariant(e.to_string()))?;
    Ok(Output {
        report: json!({ "spec": spec, "planted": planted, "precision": omega }),
        tables: vec![("data.csv", table), ("precision.csv", matrix_csv(&omega)?)],
    })
}
