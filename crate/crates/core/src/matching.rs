//! The end-to-end de-anonymization scheme: replica and deletion detection,
//! plug-in estimation, marker placement and typicality matching.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deletion::{detect_deletions, RetentionResult, DEFAULT_THRESHOLD_CONSTANT};
use crate::error::{Error, Result};
use crate::estimate::{
    assemble_joint, estimate_p_s, estimate_p_x, estimate_p_y_given_x, DistributionEstimate,
};
use crate::info::check_enumeration;
use crate::matrix::{Symbol, SymbolMatrix};
use crate::replica::{detect_replicas, replica_runs, run_representatives, ReplicaDetection};
use crate::synth::{ModelSpec, RepetitionPattern, SeedPair};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// One cell of a segmented row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell {
    Erasure,
    Symbols(Vec<Symbol>),
}

/// `D2` regrouped into one cell per source column: the run of `s_j` replicas,
/// or an erasure when `s_j = 0`.
///
/// Cells are stored as base-`|X|` codes of their symbol tuples, `y_1` most
/// significant; an erasure has arity 0 and code 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentedDatabase {
    alphabet_size: usize,
    arity: Vec<usize>,
    rows: usize,
    codes: Vec<u32>,
}

impl SegmentedDatabase {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.arity.len()
    }

    pub fn arity(&self) -> &[usize] {
        &self.arity
    }

    pub fn row_codes(&self, l: usize) -> &[u32] {
        let n = self.cols();
        &self.codes[l * n..(l + 1) * n]
    }

    pub fn cell(&self, l: usize, j: usize) -> Cell {
        let s = self.arity[j];
        if s == 0 {
            return Cell::Erasure;
        }
        let q = self.alphabet_size as u32;
        let mut code = self.row_codes(l)[j];
        let mut ys = vec![0; s];
        for y in ys.iter_mut().rev() {
            *y = (code % q) as Symbol;
            code /= q;
        }
        Cell::Symbols(ys)
    }
}

/// Places run markers in `d2` according to `s_hat`.
pub fn segment(
    d2: &SymbolMatrix,
    s_hat: &RepetitionPattern,
    alphabet_size: usize,
) -> Result<SegmentedDatabase> {
    if s_hat.total() != d2.cols() {
        return Err(Error::DimensionMismatch(format!(
            "pattern covers {} columns, database has {}",
            s_hat.total(),
            d2.cols()
        )));
    }
    check_enumeration(alphabet_size, s_hat.max_count())?;
    let q = alphabet_size as u32;
    let n = s_hat.len();
    let mut codes = Vec::with_capacity(d2.rows() * n);
    for row in d2.row_iter() {
        let mut k = 0;
        for &s in s_hat.counts() {
            let mut code = 0u32;
            for &y in &row[k..k + s] {
                if u32::from(y) >= q {
                    return Err(Error::InvalidInput("symbol outside the alphabet".into()));
                }
                code = code * q + u32::from(y);
            }
            codes.push(code);
            k += s;
        }
    }
    Ok(SegmentedDatabase {
        alphabet_size,
        arity: s_hat.counts().to_vec(),
        rows: d2.rows(),
        codes,
    })
}

/// Distances of a row pair's empirical log-likelihood rates from the plug-in
/// entropies. Infinite when an observation has zero estimated probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deviations {
    pub joint: f64,
    pub x: f64,
    pub y: f64,
}

impl Deviations {
    pub fn within(&self, epsilon: f64) -> bool {
        self.joint <= epsilon && self.x <= epsilon && self.y <= epsilon
    }
}

fn rate_gap(log_sum: f64, n: usize, entropy: f64) -> f64 {
    let rate = -log_sum / n as f64;
    if rate.is_finite() {
        (rate - entropy).abs()
    } else {
        f64::INFINITY
    }
}

/// Weak-typicality deviations of `x_row` against row `l` of `segmented`,
/// looked up directly in the assembled tables.
pub fn typicality_deviation(
    x_row: &[Symbol],
    segmented: &SegmentedDatabase,
    l: usize,
    est: &DistributionEstimate,
) -> Result<Deviations> {
    let n = segmented.cols();
    if x_row.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "row of length {} against {n} cells",
            x_row.len()
        )));
    }
    let (mut lj, mut lx, mut ly) = (0.0, 0.0, 0.0);
    for (j, (&x, &code)) in x_row.iter().zip(segmented.row_codes(l)).enumerate() {
        let x = x as usize;
        lx += est.p_x[x].log2();
        match est.table(segmented.arity[j]) {
            Some(t) => {
                lj += t.prob(x, code as usize).log2();
                ly += t.y_marginal[code as usize].log2();
            }
            None => {
                lj = f64::NEG_INFINITY;
                ly = f64::NEG_INFINITY;
            }
        }
    }
    Ok(Deviations {
        joint: rate_gap(lj, n, est.h_joint()),
        x: rate_gap(lx, n, est.h_x()),
        y: rate_gap(ly, n, est.h_y()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Matched,
    Ambiguous,
    NoTypicalCandidate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Per labeled row `l`: its unique typical anonymized row.
    pub assignment: Vec<Option<usize>>,
    pub status: Vec<RowStatus>,
    /// Per anonymized row `i`: the labeled row it was matched to.
    pub sigma_hat: Vec<Option<usize>>,
}

impl MatchResult {
    /// Fraction of anonymized rows whose estimate is missing or wrong.
    pub fn row_error_rate(&self, sigma: &[usize]) -> f64 {
        if sigma.is_empty() {
            return 0.0;
        }
        let wrong = self
            .sigma_hat
            .iter()
            .zip(sigma)
            .filter(|(hat, &truth)| **hat != Some(truth))
            .count();
        wrong as f64 / sigma.len() as f64
    }

    pub fn matched(&self) -> usize {
        self.status.iter().filter(|&&s| s == RowStatus::Matched).count()
    }
}

/// Per-column log-likelihood lookups shared by every row pair.
struct Scorer {
    q: usize,
    log_px: Vec<f64>,
    /// `cond[s][code * q + x] = sum_k log2 p(y_k | x)`; empty if no table.
    cond: Vec<Vec<f64>>,
    /// `ylog[s][code] = log2 p(y^s | s)`.
    ylog: Vec<Vec<f64>>,
    h_joint: f64,
    h_x: f64,
    h_y: f64,
}

impl Scorer {
    fn new(est: &DistributionEstimate, max_arity: usize) -> Self {
        let q = est.alphabet_size();
        let log_cond: Vec<Vec<f64>> = est
            .p_y_given_x
            .iter()
            .map(|row| row.iter().map(|p| p.log2()).collect())
            .collect();
        let mut cond = Vec::with_capacity(max_arity + 1);
        let mut ylog = Vec::with_capacity(max_arity + 1);
        for s in 0..=max_arity {
            let Some(t) = est.table(s) else {
                cond.push(Vec::new());
                ylog.push(Vec::new());
                continue;
            };
            let width = t.width();
            let mut c = vec![0.0; width * q];
            for code in 0..width {
                let mut rest = code;
                for _ in 0..s {
                    let y = rest % q;
                    rest /= q;
                    for x in 0..q {
                        c[code * q + x] += log_cond[x][y];
                    }
                }
            }
            cond.push(c);
            ylog.push(t.y_marginal.iter().map(|p| p.log2()).collect());
        }
        Self {
            q,
            log_px: est.p_x.iter().map(|p| p.log2()).collect(),
            cond,
            ylog,
            h_joint: est.h_joint(),
            h_x: est.h_x(),
            h_y: est.h_y(),
        }
    }
}

/// Matches each labeled row to the unique anonymized row that is jointly
/// `epsilon`-typical with it; zero or several candidates leave it unmatched.
/// Anonymized rows claimed by more than one labeled row are released and
/// every claimant is marked ambiguous.
pub fn match_rows(
    d1: &SymbolMatrix,
    segmented: &SegmentedDatabase,
    est: &DistributionEstimate,
    epsilon: f64,
) -> Result<MatchResult> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = segmented.cols();
    if d1.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} anonymized columns against {n} segmented columns",
            d1.cols()
        )));
    }
    if est.alphabet_size() != segmented.alphabet_size
        || d1.max_symbol().is_some_and(|x| x as usize >= est.alphabet_size())
    {
        return Err(Error::InvalidInput("alphabet mismatch".into()));
    }
    let max_arity = segmented.arity.iter().copied().max().unwrap_or(0);
    let scorer = Scorer::new(est, max_arity);
    let q = scorer.q;

    let x_logs: Vec<f64> = d1
        .row_iter()
        .map(|r| r.iter().map(|&x| scorer.log_px[x as usize]).sum())
        .collect();
    let x_typical: Vec<usize> = (0..d1.rows())
        .filter(|&i| rate_gap(x_logs[i], n, scorer.h_x) <= epsilon)
        .collect();

    let claims: Vec<(RowStatus, Option<usize>)> = (0..segmented.rows())
        .into_par_iter()
        .map(|l| {
            let codes = segmented.row_codes(l);
            let mut ysum = 0.0;
            let mut weights = vec![0.0; n * q];
            for (j, (&s, &code)) in segmented.arity.iter().zip(codes).enumerate() {
                let (cond, ylog) = (&scorer.cond[s], &scorer.ylog[s]);
                let w = &mut weights[j * q..(j + 1) * q];
                if cond.is_empty() {
                    w.fill(f64::NEG_INFINITY);
                    ysum = f64::NEG_INFINITY;
                    continue;
                }
                let code = code as usize;
                w.copy_from_slice(&cond[code * q..(code + 1) * q]);
                ysum += ylog[code];
            }
            if rate_gap(ysum, n, scorer.h_y) > epsilon {
                return (RowStatus::NoTypicalCandidate, None);
            }
            let mut found = None;
            for &i in &x_typical {
                let row = d1.row(i);
                let mut lj = x_logs[i];
                for (j, &x) in row.iter().enumerate() {
                    lj += weights[j * q + x as usize];
                }
                if rate_gap(lj, n, scorer.h_joint) <= epsilon {
                    if found.is_some() {
                        return (RowStatus::Ambiguous, None);
                    }
                    found = Some(i);
                }
            }
            match found {
                Some(i) => (RowStatus::Matched, Some(i)),
                None => (RowStatus::NoTypicalCandidate, None),
            }
        })
        .collect();

    let mut claimants = vec![0usize; d1.rows()];
    for (_, i) in &claims {
        if let Some(i) = i {
            claimants[*i] += 1;
        }
    }
    let mut assignment = Vec::with_capacity(claims.len());
    let mut status = Vec::with_capacity(claims.len());
    let mut sigma_hat = vec![None; d1.rows()];
    for (l, (st, i)) in claims.into_iter().enumerate() {
        match i {
            Some(i) if claimants[i] == 1 => {
                sigma_hat[i] = Some(l);
                assignment.push(Some(i));
                status.push(st);
            }
            Some(_) => {
                assignment.push(None);
                status.push(RowStatus::Ambiguous);
            }
            None => {
                assignment.push(None);
                status.push(st);
            }
        }
    }
    Ok(MatchResult {
        assignment,
        status,
        sigma_hat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchOptions {
    pub epsilon: f64,
    /// Multiplier of the deletion-detection outlier threshold.
    pub threshold_constant: f64,
    /// Additive smoothing for the conditional estimate; 0 disables it.
    pub pseudo_count: f64,
    pub alphabet_size: usize,
    pub s_max: usize,
}

impl MatchOptions {
    pub fn new(alphabet_size: usize, s_max: usize) -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            threshold_constant: DEFAULT_THRESHOLD_CONSTANT,
            pseudo_count: 0.0,
            alphabet_size,
            s_max,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Where the matching distributions come from.
#[derive(Clone, Copy, Debug)]
pub enum Distributions<'a> {
    /// Plug-in estimates from the seeds and the detected pattern.
    Estimated,
    /// The true model, as a distribution-aware reference.
    Known(&'a ModelSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum StageStatus {
    Ok,
    Failed(String),
    Skipped,
}

impl StageStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, StageStatus::Ok)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub replica_detection: StageStatus,
    pub deletion_detection: StageStatus,
    pub estimation: StageStatus,
    pub matching: StageStatus,
    /// Neither the database nor the seeds showed a second mixture component,
    /// so every labeled column was taken as its own source column.
    pub replica_single_component: bool,
    /// Database and seed replica decisions differed; the decision from the
    /// taller matrix was used.
    pub replica_disagreement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deanonymization {
    pub stages: StageReport,
    pub is_replica: Option<Vec<bool>>,
    pub retention: Option<RetentionResult>,
    pub s_hat: Option<RepetitionPattern>,
    pub estimate: Option<DistributionEstimate>,
    pub matching: Option<MatchResult>,
}

impl Deanonymization {
    /// Row error rate; every row counts as an error when a stage failed.
    pub fn row_error_rate(&self, sigma: &[usize]) -> f64 {
        self.matching
            .as_ref()
            .map_or(1.0, |m| m.row_error_rate(sigma))
    }
}

struct ReplicaChoice {
    is_replica: Vec<bool>,
    single_component: bool,
    disagreement: bool,
}

fn choose_replicas(d2: &SymbolMatrix, g2: &SymbolMatrix) -> Result<ReplicaChoice> {
    let k = d2.cols();
    let from_db = detect_replicas(d2);
    let from_seeds = detect_replicas(g2);
    let pick = |a: ReplicaDetection, b: ReplicaDetection, a_rows: usize, b_rows: usize| {
        let disagreement = a.is_replica != b.is_replica;
        let is_replica = if a_rows >= b_rows { a.is_replica } else { b.is_replica };
        ReplicaChoice {
            is_replica,
            single_component: false,
            disagreement,
        }
    };
    match (from_db, from_seeds) {
        (Ok(a), Ok(b)) => Ok(pick(a, b, d2.rows(), g2.rows())),
        (Ok(a), Err(Error::SingleComponent)) | (Err(Error::SingleComponent), Ok(a)) => {
            Ok(ReplicaChoice {
                is_replica: a.is_replica,
                single_component: false,
                disagreement: false,
            })
        }
        (Err(Error::SingleComponent), Err(Error::SingleComponent)) => Ok(ReplicaChoice {
            is_replica: vec![false; k.saturating_sub(1)],
            single_component: true,
            disagreement: false,
        }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Runs the full scheme. Stage errors are recorded in the report; the
/// function itself only fails on malformed inputs.
pub fn deanonymize(
    d1: &SymbolMatrix,
    d2: &SymbolMatrix,
    seeds: &SeedPair,
    options: &MatchOptions,
    distributions: Distributions<'_>,
) -> Result<Deanonymization> {
    if d1.rows() != d2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "databases have {} and {} rows",
            d1.rows(),
            d2.rows()
        )));
    }
    if seeds.g1.cols() != d1.cols() || seeds.g2.cols() != d2.cols() {
        return Err(Error::DimensionMismatch(
            "seed columns do not match the databases".into(),
        ));
    }
    let mut out = Deanonymization {
        stages: StageReport {
            replica_detection: StageStatus::Skipped,
            deletion_detection: StageStatus::Skipped,
            estimation: StageStatus::Skipped,
            matching: StageStatus::Skipped,
            replica_single_component: false,
            replica_disagreement: false,
        },
        is_replica: None,
        retention: None,
        s_hat: None,
        estimate: None,
        matching: None,
    };

    let choice = match choose_replicas(d2, &seeds.g2) {
        Ok(c) => c,
        Err(e) => {
            out.stages.replica_detection = StageStatus::Failed(e.to_string());
            return Ok(out);
        }
    };
    out.stages.replica_detection = StageStatus::Ok;
    out.stages.replica_single_component = choice.single_component;
    out.stages.replica_disagreement = choice.disagreement;
    let k = d2.cols();
    let runs = replica_runs(&choice.is_replica, k);
    let g2_tilde = seeds
        .g2
        .select_columns(&run_representatives(&choice.is_replica, k));
    out.is_replica = Some(choice.is_replica);

    let deletion = match detect_deletions(
        &seeds.g1,
        &g2_tilde,
        options.alphabet_size,
        options.threshold_constant,
    ) {
        Ok(d) => d,
        Err(e) => {
            out.stages.deletion_detection = StageStatus::Failed(e.to_string());
            return Ok(out);
        }
    };
    out.stages.deletion_detection = StageStatus::Ok;
    let n = d1.cols();
    let mut s_hat = vec![0; n];
    for (&r, &len) in deletion.retention.retained.iter().zip(&runs) {
        s_hat[r] = len;
    }
    let s_hat = RepetitionPattern::new(s_hat);

    let estimate = match distributions {
        Distributions::Known(spec) => DistributionEstimate::from_spec(spec),
        Distributions::Estimated => estimate_p_x(&seeds.g1, options.alphabet_size).and_then(|p_x| {
            let cond = estimate_p_y_given_x(
                &seeds.g1,
                &g2_tilde,
                &deletion.retention,
                options.alphabet_size,
                options.pseudo_count,
            )?;
            let p_s = estimate_p_s(&s_hat)?;
            assemble_joint(&p_x, &cond, &p_s)
        }),
    };
    out.retention = Some(deletion.retention);
    let estimate = match estimate {
        Ok(e) => e.with_s_max(options.s_max),
        Err(e) => {
            out.stages.estimation = StageStatus::Failed(e.to_string());
            out.s_hat = Some(s_hat);
            return Ok(out);
        }
    };
    out.stages.estimation = StageStatus::Ok;

    let result = segment(d2, &s_hat, options.alphabet_size)
        .and_then(|seg| match_rows(d1, &seg, &estimate, options.epsilon));
    match result {
        Ok(m) => {
            out.stages.matching = StageStatus::Ok;
            out.matching = Some(m);
        }
        Err(e) => out.stages.matching = StageStatus::Failed(e.to_string()),
    }
    out.s_hat = Some(s_hat);
    out.estimate = Some(estimate);
    Ok(out)
}
