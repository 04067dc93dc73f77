//! Command-line interface.
//!
//! Every subcommand reads an optional TOML config; flags override its keys.
//! `DEANON_OUT_DIR` overrides the output directory and nothing else.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::Config;
use crate::deletion::detect_deletions;
use crate::error::{Error, Result};
use crate::estimate::{assemble_joint, estimate_p_s, estimate_p_x, estimate_p_y_given_x};
use crate::harness::{emit, run_experiment, Format, SweepAxis};
use crate::info::capacity;
use crate::io::{load_json, load_matrix, save_json, save_matrix, Truth};
use crate::matching::{deanonymize, Distributions, MatchOptions};
use crate::matrix::SymbolMatrix;
use crate::replica::{detect_replicas, replica_runs, run_representatives};
use crate::rng::Streams;
use crate::synth::{Instance, RepetitionPattern, SeedPair};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_MISDETECTION: i32 = 4;
pub const EXIT_ALL_USELESS: i32 = 5;
pub const EXIT_SINGLE_COMPONENT: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "deanon", version, about = "Database de-anonymization under column repetitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate D1, D2, seeds and the hidden truth.
    Gen(GenArgs),
    /// Classify adjacent D2 columns as replicas; CSV `j,h_j,decision`.
    DetectReplicas(DetectReplicasArgs),
    /// Find deleted columns from the seeds.
    DetectDeletions(DetectDeletionsArgs),
    /// Plug-in estimates from the seeds, as TOML.
    Estimate(EstimateArgs),
    /// Full de-anonymization of a generated instance.
    Match(MatchArgs),
    /// Monte Carlo trials over one or more configuration points.
    Experiment(ExperimentArgs),
    /// Matching capacity of the model, as JSON.
    Capacity(ModelArgs),
}

/// Model and size keys, mirroring the config file.
#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alphabet_size: Option<usize>,
    /// Comma-separated probabilities.
    #[arg(long, value_parser = parse_vector)]
    pub p_x: Option<::std::vec::Vec<f64>>,
    /// Rows separated by `;`, entries by `,`.
    #[arg(long, value_parser = parse_matrix)]
    pub p_y_given_x: Option<::std::vec::Vec<Vec<f64>>>,
    /// Comma-separated probabilities of 0..=s_max repetitions.
    #[arg(long, value_parser = parse_vector)]
    pub p_s: Option<::std::vec::Vec<f64>>,
    #[arg(long)]
    pub s_max: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long)]
    pub master_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OutDir {
    #[arg(long, env = "DEANON_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct DetectReplicasArgs {
    /// Labeled database file.
    #[arg(long)]
    pub d2: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectDeletionsArgs {
    #[arg(long)]
    pub g1: PathBuf,
    #[arg(long)]
    pub g2: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alphabet_size: Option<usize>,
    #[arg(long)]
    pub threshold_constant: Option<f64>,
    /// `g2` is already replica-free.
    #[arg(long)]
    pub replica_free: bool,
    /// Dump the cross-distance matrix of the final remapping as CSV.
    #[arg(long)]
    pub distances: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub g1: PathBuf,
    #[arg(long)]
    pub g2: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alphabet_size: Option<usize>,
    #[arg(long)]
    pub threshold_constant: Option<f64>,
    #[arg(long)]
    pub pseudo_count: Option<f64>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Directory written by `gen`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub threshold_constant: Option<f64>,
    #[arg(long)]
    pub pseudo_count: Option<f64>,
    /// Match with the true distributions instead of plug-in estimates.
    #[arg(long)]
    pub known_distributions: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub sweep_axis: Option<Axis>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_values: Option<Vec<usize>>,
    #[arg(long)]
    pub threshold_constant: Option<f64>,
    #[arg(long)]
    pub pseudo_count: Option<f64>,
    #[arg(long)]
    pub memory_cap_bytes: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// File name inside the output directory.
    #[arg(long)]
    pub output: Option<String>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Axis {
    M,
    N,
}

fn parse_vector(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn parse_matrix(s: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    s.split(';').map(parse_vector).collect()
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    path.map_or_else(|| Ok(Config::default()), Config::load)
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

impl ModelArgs {
    pub fn resolve(&self) -> Result<Config> {
        let mut c = load_config(self.config.as_deref())?;
        set(&mut c.alphabet_size, self.alphabet_size);
        set(&mut c.p_x, self.p_x.clone());
        set(&mut c.p_y_given_x, self.p_y_given_x.clone());
        set(&mut c.p_s, self.p_s.clone());
        set(&mut c.s_max, self.s_max);
        set(&mut c.m, self.m);
        set(&mut c.n, self.n);
        set(&mut c.lambda, self.lambda);
        set(&mut c.master_seed, self.master_seed);
        Ok(c)
    }
}

fn alphabet_from(config: &Config, flag: Option<usize>) -> Result<usize> {
    flag.or(config.alphabet_size)
        .or_else(|| config.p_x.as_ref().map(Vec::len))
        .ok_or_else(|| Error::Config("missing key `alphabet_size`".into()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// File names written by `gen`.
pub const D1_FILE: &str = "d1.bin";
pub const D2_FILE: &str = "d2.bin";
pub const G1_FILE: &str = "g1.bin";
pub const G2_FILE: &str = "g2.bin";
pub const TRUTH_FILE: &str = "truth.json";

fn gen(args: &GenArgs) -> Result<()> {
    let config = args.model.resolve()?;
    let spec = config.model_spec()?;
    let need = |v: Option<usize>, key: &str| v.ok_or_else(|| Error::Config(format!("missing key `{key}`")));
    let (m, n, lambda) = (need(config.m, "m")?, need(config.n, "n")?, need(config.lambda, "lambda")?);
    let streams = Streams::new(config.master_seed.unwrap_or(0));
    let inst = Instance::generate(&spec, m, n, lambda, &streams)?;
    let dir = &args.out.out_dir;
    create_dir(dir)?;
    save_matrix(&dir.join(D1_FILE), &inst.pair.d1)?;
    save_matrix(&dir.join(D2_FILE), &inst.pair.d2)?;
    save_matrix(&dir.join(G1_FILE), &inst.seeds.g1)?;
    save_matrix(&dir.join(G2_FILE), &inst.seeds.g2)?;
    let truth = Truth {
        sigma: inst.pair.sigma,
        pattern: inst.pair.pattern,
        seed: streams.seed(),
    };
    save_json(&dir.join(TRUTH_FILE), &truth)?;
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn detect_replicas_cmd(args: &DetectReplicasArgs) -> Result<()> {
    let d2 = load_matrix(&args.d2)?;
    let det = detect_replicas(&d2)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["j", "h_j", "decision"]).map_err(fail)?;
    for (j, (h, r)) in det.series.values().iter().zip(&det.is_replica).enumerate() {
        let decision = if *r { "replica" } else { "distinct" };
        w.write_record([j.to_string(), h.to_string(), decision.to_string()])
            .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    match &args.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

/// Replica decisions on the seeds, falling back to "no replicas" when the
/// series has a single component.
fn seed_replicas(g2: &SymbolMatrix) -> Result<Vec<bool>> {
    match detect_replicas(g2) {
        Ok(d) => Ok(d.is_replica),
        Err(Error::SingleComponent) => Ok(vec![false; g2.cols().saturating_sub(1)]),
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct DeletionOutput {
    retained: Vec<usize>,
    deleted: Vec<usize>,
    remapping: Vec<u8>,
    threshold: f64,
    mu: f64,
}

fn detect_deletions_cmd(args: &DetectDeletionsArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let q = alphabet_from(&config, args.alphabet_size)?;
    let c = args
        .threshold_constant
        .or(config.threshold_constant)
        .unwrap_or(crate::deletion::DEFAULT_THRESHOLD_CONSTANT);
    let g1 = load_matrix(&args.g1)?;
    let mut g2 = load_matrix(&args.g2)?;
    if !args.replica_free {
        let reps = seed_replicas(&g2)?;
        g2 = g2.select_columns(&run_representatives(&reps, g2.cols()));
    }
    let det = detect_deletions(&g1, &g2, q, c)?;
    if let Some(path) = &args.distances {
        std::fs::write(path, det.distances.to_csv()).map_err(|e| Error::io(path, e))?;
    }
    print_json(&DeletionOutput {
        retained: det.retention.retained,
        deleted: det.retention.deleted,
        remapping: det.remapping.images().iter().map(|s| s + 1).collect(),
        threshold: det.threshold,
        mu: det.distances.mu,
    })
}

fn estimate_cmd(args: &EstimateArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let q = alphabet_from(&config, args.alphabet_size)?;
    let c = args
        .threshold_constant
        .or(config.threshold_constant)
        .unwrap_or(crate::deletion::DEFAULT_THRESHOLD_CONSTANT);
    let pseudo = args.pseudo_count.or(config.pseudo_count).unwrap_or(0.0);
    let g1 = load_matrix(&args.g1)?;
    let g2 = load_matrix(&args.g2)?;
    let reps = seed_replicas(&g2)?;
    let g2_tilde = g2.select_columns(&run_representatives(&reps, g2.cols()));
    let det = detect_deletions(&g1, &g2_tilde, q, c)?;
    let mut s_hat = vec![0; g1.cols()];
    for (&r, len) in det.retention.retained.iter().zip(replica_runs(&reps, g2.cols())) {
        s_hat[r] = len;
    }
    let p_x = estimate_p_x(&g1, q)?;
    let cond = estimate_p_y_given_x(&g1, &g2_tilde, &det.retention, q, pseudo)?;
    let p_s = estimate_p_s(&RepetitionPattern::new(s_hat))?;
    let mut est = assemble_joint(&p_x, &cond, &p_s)?;
    if let Some(s_max) = config.s_max {
        est = est.with_s_max(s_max);
    }
    let text = est.to_toml()?;
    let dir = &args.out.out_dir;
    create_dir(dir)?;
    let path = dir.join("estimate.toml");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct MatchOutput<'a> {
    stages: &'a crate::matching::StageReport,
    row_error_rate: f64,
    matched_rows: usize,
    rows: usize,
    options: &'a MatchOptions,
    known_distributions: bool,
    seed: u64,
}

fn match_cmd(args: &MatchArgs) -> Result<()> {
    let config = args.model.resolve()?;
    let spec = config.model_spec()?;
    let dir = &args.input;
    let d1 = load_matrix(&dir.join(D1_FILE))?;
    let d2 = load_matrix(&dir.join(D2_FILE))?;
    let seeds = SeedPair {
        g1: load_matrix(&dir.join(G1_FILE))?,
        g2: load_matrix(&dir.join(G2_FILE))?,
    };
    let truth: Truth = load_json(&dir.join(TRUTH_FILE))?;
    let mut options = MatchOptions::new(spec.alphabet_size(), spec.s_max());
    options.epsilon = args
        .epsilon
        .or(config.epsilon)
        .unwrap_or(crate::matching::DEFAULT_EPSILON);
    if let Some(c) = args.threshold_constant.or(config.threshold_constant) {
        options.threshold_constant = c;
    }
    if let Some(p) = args.pseudo_count.or(config.pseudo_count) {
        options.pseudo_count = p;
    }
    let dist = if args.known_distributions {
        Distributions::Known(&spec)
    } else {
        Distributions::Estimated
    };
    let run = deanonymize(&d1, &d2, &seeds, &options, dist)?;
    print_json(&MatchOutput {
        stages: &run.stages,
        row_error_rate: run.row_error_rate(&truth.sigma),
        matched_rows: run.matching.as_ref().map_or(0, |m| m.matched()),
        rows: d1.rows(),
        options: &options,
        known_distributions: args.known_distributions,
        seed: truth.seed,
    })
}

fn experiment_cmd(args: &ExperimentArgs) -> Result<()> {
    let mut c = args.model.resolve()?;
    set(&mut c.epsilon, args.epsilon);
    set(&mut c.trials, args.trials);
    set(
        &mut c.sweep_axis,
        args.sweep_axis.map(|a| match a {
            Axis::M => SweepAxis::M,
            Axis::N => SweepAxis::N,
        }),
    );
    set(&mut c.sweep_values, args.sweep_values.clone());
    set(&mut c.threshold_constant, args.threshold_constant);
    set(&mut c.pseudo_count, args.pseudo_count);
    set(&mut c.memory_cap_bytes, args.memory_cap_bytes);
    let config = c.experiment()?;
    let report = run_experiment(&config)?;
    let (format, default_name) = match args.format {
        OutputFormat::Csv => (Format::Csv, "experiment.csv"),
        OutputFormat::Json => (Format::Json, "experiment.json"),
    };
    let path = args.out.out_dir.join(args.output.as_deref().unwrap_or(default_name));
    emit(&report, format, &path)?;
    for p in &report.points {
        eprintln!(
            "m={} n={} R={:.4} C={:.4} row_error={:.4} perfect={}/{}",
            p.m, p.n, p.rate, p.capacity, p.mean_row_error_rate,
            p.perfect_recovery.successes, p.trials
        );
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn capacity_cmd(args: &ModelArgs) -> Result<()> {
    let spec = args.resolve()?.model_spec()?;
    print_json(&capacity(&spec)?)
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidModel(_) => EXIT_CONFIG,
        Error::InfeasibleSize { .. } | Error::EnumerationInfeasible { .. } => EXIT_INFEASIBLE,
        Error::Misdetection { .. } => EXIT_MISDETECTION,
        Error::AllRemappingsUseless => EXIT_ALL_USELESS,
        Error::SingleComponent => EXIT_SINGLE_COMPONENT,
        _ => EXIT_FAILURE,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::DetectReplicas(a) => detect_replicas_cmd(a),
        Command::DetectDeletions(a) => detect_deletions_cmd(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Match(a) => match_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
        Command::Capacity(a) => capacity_cmd(a),
    }
}

/// Parses `std::env::args`, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
