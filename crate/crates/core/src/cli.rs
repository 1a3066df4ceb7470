//! Command-line front end: `simulate`, `fit`, `path`, `cv` and `eval`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or parse error,
//! 3 numerical non-convergence.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::io::{
    load_dataset, read_json, write_dataset_csv, write_json, CvReportFile, EvalReportFile,
    FitReport, IngestOptions, TruthReport,
};
use crate::metrics::{aggregate_univariate_blocks, evaluate};
use crate::modelsel::{cross_validate, lambda_max, regularization_path, CvConfig, LambdaGrid};
use crate::optimizer::{fit, FitConfig, FitResult};
use crate::partition::NodePartition;
use crate::synth::{generate_truth, sample, GeneratorConfig};
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(name = "mconcord", version, about = "Sparse block precision-matrix estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random block precision matrix and samples from it.
    Simulate(SimulateArgs),
    /// Fit at a single penalty level.
    Fit(FitArgs),
    /// Fit along a decreasing penalty grid with warm starts.
    Path(PathArgs),
    /// Select the penalty by K-fold cross-validation, then refit.
    Cv(CvArgs),
    /// Score an estimated edge set against the truth.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Group penalty over each node's block.
    Mconcord,
    /// Every component as its own node; node edges aggregated afterwards.
    Concord,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Mconcord => "mconcord",
            Mode::Concord => "concord",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub density: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (truth.json, data.csv, partition.json).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Mconcord)]
    pub mode: Mode,
    /// Use the data as given instead of subtracting column means.
    #[arg(long)]
    pub no_center: bool,
    /// Scale every column to unit sample variance.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_sweeps: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Log-spaced grid from lambda_max as `count:ratio`.
    #[arg(long, default_value = "30:0.01")]
    pub lambda_grid: String,
    /// Explicit comma-separated grid (overrides --lambda-grid).
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "30:0.01")]
    pub lambda_grid: String,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stop scanning the grid after this many values without a new best
    /// validation loss; 0 scans the whole grid.
    #[arg(long, default_value_t = CvConfig::DEFAULT_PATIENCE)]
    pub patience: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Estimated edge graph JSON.
    #[arg(long)]
    pub estimate: PathBuf,
    /// True edge graph JSON (a truth file from `simulate` also works).
    #[arg(long)]
    pub truth: PathBuf,
    /// Output JSON file.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `count:ratio`.
pub fn parse_grid_spec(spec: &str) -> Result<(usize, f64)> {
    let bad = || Error::InvalidInput(format!("--lambda-grid expects count:ratio, got `{spec}`"));
    let (count, ratio) = spec.split_once(':').ok_or_else(bad)?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    let ratio: f64 = ratio.trim().parse().map_err(|_| bad())?;
    Ok((count, ratio))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 1,
        Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 1,
        Error::NonFinite { .. } => 3,
        _ => 2,
    }
}

/// Runs the parsed command and maps the outcome onto the exit-code contract.
pub fn run(cli: Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("warning: solver did not converge within the sweep limit");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

enum Outcome {
    Converged,
    NotConverged,
}

impl Outcome {
    fn from_fits<'a>(fits: impl IntoIterator<Item = &'a FitResult>) -> Self {
        if fits.into_iter().all(|f| f.converged) {
            Outcome::Converged
        } else {
            Outcome::NotConverged
        }
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Simulate(args) => run_simulate(&args).map(|_| Outcome::Converged),
        Command::Fit(args) => with_jobs(args.input.jobs, || run_fit(&args)),
        Command::Path(args) => with_jobs(args.input.jobs, || run_path(&args)),
        Command::Cv(args) => with_jobs(args.input.jobs, || run_cv(&args)),
        Command::Eval(args) => run_eval(&args).map(|_| Outcome::Converged),
    }
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return Err(Error::InvalidInput("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = GeneratorConfig::new(args.p, args.k, args.density, args.n, args.seed);
    let truth = generate_truth(&cfg)?;
    let data = sample(&truth, args.n, args.seed)?;
    fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("truth.json"), &TruthReport::new(&truth))?;
    write_json(&args.out.join("partition.json"), &truth.partition)?;
    let mut out = BufWriter::new(File::create(args.out.join("data.csv"))?);
    write_dataset_csv(&mut out, &data)?;
    out.flush()?;
    println!("{}", serde_json::to_string(&cfg)?);
    println!(
        "seed {} -> {} edges over {} pairs",
        args.seed,
        truth.graph.num_edges(),
        cfg.num_pairs()
    );
    Ok(())
}

/// Loaded data together with the layout the solver sees.
struct Prepared {
    /// Data under the user's partition.
    data: Dataset,
    /// Data under the partition handed to the solver.
    solver_data: Dataset,
    ingest: IngestOptions,
    mode: Mode,
}

impl Prepared {
    fn load(input: &InputArgs) -> Result<Self> {
        let ingest = IngestOptions {
            center: !input.no_center,
            standardize: input.standardize,
        };
        let data = load_dataset(&input.data, &input.partition, ingest)?;
        let solver_data = match input.mode {
            Mode::Mconcord => data.clone(),
            Mode::Concord => data.with_partition(NodePartition::singletons(data.dim())?)?,
        };
        Ok(Prepared {
            data,
            solver_data,
            ingest,
            mode: input.mode,
        })
    }

    /// Node-level edge set of a fit.
    fn node_graph(&self, result: &FitResult) -> Result<EdgeGraph> {
        match self.mode {
            Mode::Mconcord => Ok(result.edge_graph()),
            Mode::Concord => aggregate_univariate_blocks(&result.edge_graph(), self.data.partition()),
        }
    }

    fn grid(&self, spec: &str, explicit: Option<&Vec<f64>>) -> Result<LambdaGrid> {
        if let Some(values) = explicit {
            return LambdaGrid::from_values(values.clone());
        }
        let (count, ratio) = parse_grid_spec(spec)?;
        LambdaGrid::log_spaced(lambda_max(&self.solver_data), count, ratio)
    }
}

fn base_config(input: &InputArgs, lambda: f64) -> FitConfig {
    FitConfig {
        lambda,
        tol: input.tol,
        max_sweeps: input.max_sweeps,
        ..FitConfig::default()
    }
}

fn write_fit(out: &Path, prepared: &Prepared, result: &FitResult, cfg: &FitConfig) -> Result<()> {
    let report = FitReport::new(result, cfg, prepared.ingest, prepared.mode.name());
    write_json(&out.join("fit.json"), &report)?;
    write_json(&out.join("edges.json"), &prepared.node_graph(result)?)?;
    Ok(())
}

fn run_fit(args: &FitArgs) -> Result<Outcome> {
    let prepared = Prepared::load(&args.input)?;
    let cfg = base_config(&args.input, args.lambda);
    let result = fit(&prepared.solver_data, &cfg, None)?;
    fs::create_dir_all(&args.input.out)?;
    write_fit(&args.input.out, &prepared, &result, &cfg)?;
    Ok(Outcome::from_fits([&result]))
}

fn run_path(args: &PathArgs) -> Result<Outcome> {
    let prepared = Prepared::load(&args.input)?;
    let grid = prepared.grid(&args.lambda_grid, args.lambda.as_ref())?;
    let base = base_config(&args.input, grid.values[0]);
    let fits = regularization_path(&prepared.solver_data, &grid, &base)?;
    let out = &args.input.out;
    fs::create_dir_all(out)?;
    let mut csv = csv::Writer::from_path(out.join("path.csv"))?;
    csv.write_record(["index", "lambda", "n_total", "objective", "converged", "sweeps"])?;
    for (t, result) in fits.iter().enumerate() {
        let graph = prepared.node_graph(result)?;
        csv.write_record([
            (t + 1).to_string(),
            result.lambda.to_string(),
            graph.num_edges().to_string(),
            result.objective().to_string(),
            result.converged.to_string(),
            result.sweeps.to_string(),
        ])?;
        write_json(&out.join(format!("edges_{:03}.json", t + 1)), &graph)?;
    }
    csv.flush()?;
    Ok(Outcome::from_fits(&fits))
}

fn run_cv(args: &CvArgs) -> Result<Outcome> {
    let prepared = Prepared::load(&args.input)?;
    let grid = prepared.grid(&args.lambda_grid, None)?;
    let base = base_config(&args.input, grid.values[0]);
    let cv = CvConfig {
        folds: args.folds,
        seed: args.seed,
        grid,
        patience: (args.patience > 0).then_some(args.patience),
    };
    let report = cross_validate(&prepared.solver_data, &cv, &base)?;
    let cfg = FitConfig {
        lambda: report.best_lambda,
        ..base.clone()
    };
    let result = fit(&prepared.solver_data, &cfg, None)?;
    let out = &args.input.out;
    fs::create_dir_all(out)?;
    let file = CvReportFile {
        version: VERSION.to_string(),
        mode: prepared.mode.name().to_string(),
        config: base,
        ingest: prepared.ingest,
        report,
    };
    write_json(&out.join("cv.json"), &file)?;
    write_fit(out, &prepared, &result, &cfg)?;
    Ok(Outcome::from_fits([&result]))
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let est: EdgeGraph = read_json(&args.estimate)?;
    let truth: EdgeGraph = read_json(&args.truth)?;
    let report = evaluate(&est, &truth)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_json(
        &args.out,
        &EvalReportFile {
            version: VERSION.to_string(),
            report,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        assert_eq!(parse_grid_spec("30:0.01").unwrap(), (30, 0.01));
        assert!(parse_grid_spec("30").is_err());
        assert!(parse_grid_spec("a:b").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 1);
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), 2);
        assert_eq!(exit_code(&Error::NonFinite { i: 1, j: 2 }), 3);
    }
}
