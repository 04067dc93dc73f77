//! Monte Carlo experiment runner.
//!
//! Trials run in parallel, each from its own derived seed, and are gathered
//! in trial order, so reports do not depend on the thread count.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{capacity, conditional_joint_entropy, total_variation, CapacityReport};
use crate::matching::{deanonymize, Deanonymization, Distributions, MatchOptions};
use crate::rng::Streams;
use crate::synth::{Instance, ModelSpec};

pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    M,
    N,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: ModelSpec,
    pub m: usize,
    pub n: usize,
    pub lambda: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub sweep: Option<Sweep>,
    pub threshold_constant: f64,
    pub pseudo_count: f64,
    pub memory_cap_bytes: u64,
}

impl ExperimentConfig {
    pub fn new(spec: ModelSpec, m: usize, n: usize, lambda: usize) -> Self {
        Self {
            spec,
            m,
            n,
            lambda,
            epsilon: crate::matching::DEFAULT_EPSILON,
            trials: 1,
            master_seed: 0,
            sweep: None,
            threshold_constant: crate::deletion::DEFAULT_THRESHOLD_CONSTANT,
            pseudo_count: 0.0,
            memory_cap_bytes: DEFAULT_MEMORY_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.m == 0 || self.n == 0 || self.lambda == 0 {
            return Err(Error::Config("m, n and lambda must be positive".into()));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.contains(&0) {
                return Err(Error::Config("sweep values must be positive".into()));
            }
        }
        Ok(())
    }

    /// `(m, n)` for every configuration point.
    pub fn points(&self) -> Vec<(usize, usize)> {
        match &self.sweep {
            None => vec![(self.m, self.n)],
            Some(Sweep { axis, values }) => values
                .iter()
                .map(|&v| match axis {
                    SweepAxis::M => (v, self.n),
                    SweepAxis::N => (self.m, v),
                })
                .collect(),
        }
    }

    fn match_options(&self) -> MatchOptions {
        MatchOptions {
            epsilon: self.epsilon,
            threshold_constant: self.threshold_constant,
            pseudo_count: self.pseudo_count,
            alphabet_size: self.spec.alphabet_size(),
            s_max: self.spec.s_max(),
        }
    }
}

/// Rough peak bytes for one trial at `(m, n)`, times the worker count.
pub fn estimated_memory(config: &ExperimentConfig, m: usize, n: usize) -> u64 {
    let (m, n, lambda) = (m as u64, n as u64, config.lambda as u64);
    let k = n * config.spec.s_max() as u64;
    let per_trial = m * n + m * k + lambda * (n + 2 * k) + 8 * m * 4 + 4 * m * n;
    per_trial * rayon::current_num_threads() as u64
}

/// Database growth rate `log2(m) / n`.
pub fn growth_rate(m: usize, n: usize) -> f64 {
    (m as f64).log2() / n as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub lambda: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub capacity: f64,
    pub replica_ok: bool,
    pub deletion_ok: bool,
    /// Largest total-variation error among the estimated `p_{X,Y}` and `p_S`.
    pub est_tv: Option<f64>,
    pub row_error_rate: f64,
    pub seed: u64,
    /// `|H^(X,Y^S|S) - H(X,Y^S|S)|`.
    pub entropy_gap: Option<f64>,
    /// `|I^(X;Y^S|S) - I(X;Y^S|S)|`.
    pub information_gap: Option<f64>,
    pub failed_stage: Option<String>,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    pub interval: (f64, f64),
}

impl RateSummary {
    pub fn new(successes: usize, trials: usize) -> Self {
        Self {
            successes,
            trials,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            interval: wilson_interval(successes, trials),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub capacity: f64,
    pub trials: usize,
    pub replica_detection: RateSummary,
    pub deletion_detection: RateSummary,
    /// Trials in which every row was recovered.
    pub perfect_recovery: RateSummary,
    /// Pooled over all rows of all trials.
    pub row_errors: RateSummary,
    pub mean_row_error_rate: f64,
    /// Empirical stage failure rates: replica detection, deletion detection,
    /// entropy estimate off by more than epsilon, information estimate off by
    /// more than epsilon.
    pub kappa: [f64; 4],
}

impl PointSummary {
    pub fn from_records(point: usize, records: &[TrialRecord], epsilon: f64) -> Option<Self> {
        let first = records.first()?;
        let t = records.len();
        let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
        let replica = count(&|r| r.replica_ok);
        let deletion = count(&|r| r.deletion_ok);
        let perfect = count(&|r| r.row_error_rate == 0.0);
        let wrong_rows: usize = records
            .iter()
            .map(|r| (r.row_error_rate * r.m as f64).round() as usize)
            .sum();
        let total_rows: usize = records.iter().map(|r| r.m).sum();
        let off = |g: Option<f64>| g.is_none_or(|g| g > epsilon);
        Some(Self {
            point,
            m: first.m,
            n: first.n,
            rate: first.rate,
            capacity: first.capacity,
            trials: t,
            replica_detection: RateSummary::new(replica, t),
            deletion_detection: RateSummary::new(deletion, t),
            perfect_recovery: RateSummary::new(perfect, t),
            row_errors: RateSummary::new(wrong_rows, total_rows),
            mean_row_error_rate: records.iter().map(|r| r.row_error_rate).sum::<f64>() / t as f64,
            kappa: [
                1.0 - replica as f64 / t as f64,
                1.0 - deletion as f64 / t as f64,
                count(&|r| off(r.entropy_gap)) as f64 / t as f64,
                count(&|r| off(r.information_gap)) as f64 / t as f64,
            ],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub capacity: CapacityReport,
    pub points: Vec<PointSummary>,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn point_records(&self, point: usize) -> Vec<TrialRecord> {
        self.trials.iter().filter(|r| r.point == point).cloned().collect()
    }
}

/// Evaluates one finished run against the instance's ground truth.
pub fn score_trial(
    instance: &Instance,
    spec: &ModelSpec,
    run: &Deanonymization,
    truth_capacity: f64,
) -> (bool, bool, Option<f64>, Option<f64>, Option<f64>) {
    let pattern = &instance.pair.pattern;
    let replica_ok = run
        .is_replica
        .as_ref()
        .is_some_and(|r| *r == pattern.replica_adjacency());
    let deletion_ok = run
        .retention
        .as_ref()
        .is_some_and(|r| r.retained == pattern.retained());
    let (mut tv, mut h_gap, mut i_gap) = (None, None, None);
    if let Some(est) = &run.estimate {
        let joint = |p_x: &[f64], ch: &[Vec<f64>]| -> Vec<f64> {
            p_x.iter()
                .zip(ch)
                .flat_map(|(px, row)| row.iter().map(move |p| px * p))
                .collect()
        };
        let tv_xy = total_variation(
            &joint(&est.p_x, &est.p_y_given_x),
            &joint(spec.p_x(), spec.p_y_given_x()),
        );
        tv = Some(tv_xy.max(total_variation(&est.p_s, spec.p_s())));
        h_gap = Some((est.h_joint() - conditional_joint_entropy(spec)).abs());
        i_gap = Some((est.mutual_information() - truth_capacity).abs());
    }
    (replica_ok, deletion_ok, tv, h_gap, i_gap)
}

fn first_failure(run: &Deanonymization) -> Option<String> {
    let s = &run.stages;
    [
        ("replica_detection", &s.replica_detection),
        ("deletion_detection", &s.deletion_detection),
        ("estimation", &s.estimation),
        ("matching", &s.matching),
    ]
    .into_iter()
    .find_map(|(name, st)| match st {
        crate::matching::StageStatus::Failed(reason) => Some(format!("{name}: {reason}")),
        _ => None,
    })
}

/// Generates and de-anonymizes one trial.
pub fn run_trial(
    config: &ExperimentConfig,
    point: usize,
    m: usize,
    n: usize,
    trial: usize,
    truth_capacity: f64,
    distributions: Distributions<'_>,
) -> Result<TrialRecord> {
    let streams = Streams::for_trial(config.master_seed, point as u64, trial as u64);
    let instance = Instance::generate(&config.spec, m, n, config.lambda, &streams)?;
    let pair = &instance.pair;
    let run = deanonymize(
        &pair.d1,
        &pair.d2,
        &instance.seeds,
        &config.match_options(),
        distributions,
    )?;
    let (replica_ok, deletion_ok, est_tv, entropy_gap, information_gap) =
        score_trial(&instance, &config.spec, &run, truth_capacity);
    Ok(TrialRecord {
        point,
        trial,
        n,
        m,
        lambda: config.lambda,
        rate: growth_rate(m, n),
        capacity: truth_capacity,
        replica_ok,
        deletion_ok,
        est_tv,
        row_error_rate: run.row_error_rate(&pair.sigma),
        seed: streams.seed(),
        entropy_gap,
        information_gap,
        failed_stage: first_failure(&run),
    })
}

/// Runs every configuration point with plug-in estimates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, Distributions::Estimated)
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    distributions: Distributions<'_>,
) -> Result<ExperimentReport> {
    config.validate()?;
    let cap = capacity(&config.spec)?;
    let points = config.points();
    for &(m, n) in &points {
        let required = estimated_memory(config, m, n);
        if required > config.memory_cap_bytes {
            return Err(Error::InfeasibleSize {
                required,
                cap: config.memory_cap_bytes,
            });
        }
    }
    let mut trials = Vec::with_capacity(points.len() * config.trials);
    let mut summaries = Vec::with_capacity(points.len());
    for (p, &(m, n)) in points.iter().enumerate() {
        let records = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, p, m, n, t, cap.capacity, distributions))
            .collect::<Result<Vec<_>>>()?;
        summaries.extend(PointSummary::from_records(p, &records, config.epsilon));
        trials.extend(records);
    }
    Ok(ExperimentReport {
        config: config.clone(),
        capacity: cap,
        points: summaries,
        trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 11] = [
    "trial",
    "n",
    "m",
    "lambda",
    "R",
    "capacity",
    "replica_ok",
    "deletion_ok",
    "est_tv",
    "row_error_rate",
    "seed",
];

pub fn to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CSV_HEADER).map_err(fail)?;
    for r in &report.trials {
        w.write_record([
            r.trial.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.lambda.to_string(),
            r.rate.to_string(),
            r.capacity.to_string(),
            r.replica_ok.to_string(),
            r.deletion_ok.to_string(),
            r.est_tv.map_or(String::new(), |v| v.to_string()),
            r.row_error_rate.to_string(),
            r.seed.to_string(),
        ])
        .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_json(report: &ExperimentReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))
}

pub fn emit(report: &ExperimentReport, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(report)?,
        Format::Json => to_json(report)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
