//! Synthetic ground truth: the anonymized database, its repetition pattern,
//! the hidden row permutation, the labeled correlated database and seeds.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_permutation, Symbol, SymbolMatrix};
use crate::rng::{Stream, Streams};

const SUM_TOLERANCE: f64 = 1e-12;

/// Largest alphabet representable by one-byte symbols.
pub const MAX_ALPHABET: usize = 255;

/// The generative model `(p_X, p_{Y|X}, p_S)`.
///
/// The alphabet is `{1, ..., p_x.len()}` and repetition counts range over
/// `{0, ..., p_s.len() - 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    p_x: Vec<f64>,
    p_y_given_x: Vec<Vec<f64>>,
    p_s: Vec<f64>,
}

impl ModelSpec {
    pub fn new(p_x: Vec<f64>, p_y_given_x: Vec<Vec<f64>>, p_s: Vec<f64>) -> Result<Self> {
        let spec = Self {
            p_x,
            p_y_given_x,
            p_s,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform source over `size` symbols and a symmetric channel that keeps
    /// the input with probability `keep` and otherwise moves to one of the
    /// other symbols uniformly.
    pub fn symmetric(size: usize, keep: f64, p_s: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidModel("empty alphabet".into()));
        }
        let off = if size > 1 {
            (1.0 - keep) / (size - 1) as f64
        } else {
            0.0
        };
        let channel = (0..size)
            .map(|x| {
                (0..size)
                    .map(|y| if x == y { keep } else { off })
                    .collect()
            })
            .collect();
        Self::new(vec![1.0 / size as f64; size], channel, p_s)
    }

    /// Binary uniform source through a binary symmetric channel with
    /// crossover probability `crossover`.
    pub fn bsc(crossover: f64, p_s: Vec<f64>) -> Result<Self> {
        let channel = vec![vec![1.0 - crossover, crossover], vec![crossover, 1.0 - crossover]];
        Self::new(vec![0.5, 0.5], channel, p_s)
    }

    pub fn validate(&self) -> Result<()> {
        let size = self.p_x.len();
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::InvalidModel(format!(
                "alphabet size {size} outside 1..={MAX_ALPHABET}"
            )));
        }
        check_distribution("p_x", &self.p_x)?;
        if self.p_y_given_x.len() != size {
            return Err(Error::InvalidModel(format!(
                "p_y_given_x has {} rows, expected {size}",
                self.p_y_given_x.len()
            )));
        }
        for (x, row) in self.p_y_given_x.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidModel(format!(
                    "p_y_given_x row {} has {} entries, expected {size}",
                    x + 1,
                    row.len()
                )));
            }
            check_distribution(&format!("p_y_given_x row {}", x + 1), row)?;
        }
        if self.p_s.is_empty() {
            return Err(Error::InvalidModel("p_s is empty".into()));
        }
        check_distribution("p_s", &self.p_s)
    }

    pub fn alphabet_size(&self) -> usize {
        self.p_x.len()
    }

    pub fn s_max(&self) -> usize {
        self.p_s.len() - 1
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y_given_x(&self) -> &[Vec<f64>] {
        &self.p_y_given_x
    }

    pub fn p_s(&self) -> &[f64] {
        &self.p_s
    }

    /// Deletion probability `p_S(0)`.
    pub fn delta(&self) -> f64 {
        self.p_s[0]
    }

    /// Output marginal `p_Y`.
    pub fn p_y(&self) -> Vec<f64> {
        let size = self.alphabet_size();
        let mut p_y = vec![0.0; size];
        for (px, row) in self.p_x.iter().zip(&self.p_y_given_x) {
            for (acc, pyx) in p_y.iter_mut().zip(row) {
                *acc += px * pyx;
            }
        }
        p_y
    }

    pub fn mean_repetition(&self) -> f64 {
        self.p_s.iter().enumerate().map(|(s, p)| s as f64 * p).sum()
    }
}

fn check_distribution(name: &str, p: &[f64]) -> Result<()> {
    if let Some(v) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidModel(format!(
            "{name} has entry {v} outside [0, 1]"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidModel(format!("{name} sums to {total}")));
    }
    Ok(())
}

/// Column repetition counts `S_1, ..., S_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionPattern(Vec<usize>);

impl RepetitionPattern {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `K_n`, the number of labeled columns.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `K~_n`, the number of columns that were not deleted.
    pub fn retained_count(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }

    pub fn retained(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j] != 0).collect()
    }

    pub fn deleted(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j] == 0).collect()
    }

    pub fn max_count(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Source column of each labeled column.
    pub fn origins(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
            .collect()
    }

    /// Whether labeled columns `k` and `k + 1` share a source column, for
    /// every adjacent pair.
    pub fn replica_adjacency(&self) -> Vec<bool> {
        let o = self.origins();
        o.windows(2).map(|w| w[0] == w[1]).collect()
    }

    /// Indices of the first labeled column of each retained source column.
    pub fn run_heads(&self) -> Vec<usize> {
        let mut heads = Vec::with_capacity(self.retained_count());
        let mut k = 0;
        for &s in &self.0 {
            if s != 0 {
                heads.push(k);
            }
            k += s;
        }
        heads
    }
}

/// `D1`, `D2` and the hidden ground truth linking them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatabasePair {
    pub d1: SymbolMatrix,
    pub d2: SymbolMatrix,
    /// Row `i` of `d1` is row `sigma[i]` of `d2`.
    pub sigma: Vec<usize>,
    pub pattern: RepetitionPattern,
}

/// Matched seed rows sharing the database's repetition pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedPair {
    pub g1: SymbolMatrix,
    pub g2: SymbolMatrix,
}

impl SeedPair {
    pub fn lambda(&self) -> usize {
        self.g1.rows()
    }
}

fn sampler(p: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p).map_err(|e| Error::InvalidModel(e.to_string()))
}

/// An `m x n` matrix of i.i.d. draws from `p_X`.
pub fn generate_database<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<SymbolMatrix> {
    spec.validate()?;
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(format!(
            "database must be non-empty, got {m}x{n}"
        )));
    }
    let dist = sampler(spec.p_x())?;
    let data = (0..m * n).map(|_| dist.sample(rng) as Symbol).collect();
    SymbolMatrix::new(m, n, data)
}

pub fn draw_pattern<R: Rng + ?Sized>(
    n: usize,
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<RepetitionPattern> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("pattern length must be positive".into()));
    }
    let dist = sampler(spec.p_s())?;
    Ok(RepetitionPattern((0..n).map(|_| dist.sample(rng)).collect()))
}

/// Uniformly random permutation of `0..m`.
pub fn draw_permutation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..m).collect();
    sigma.shuffle(rng);
    sigma
}

/// Produces `D2`: row `sigma[i]` holds, for each source column `j` in order,
/// `s_j` independent noisy copies of `d1[i][j]`.
pub fn apply_channel<R: Rng + ?Sized>(
    d1: &SymbolMatrix,
    pattern: &RepetitionPattern,
    sigma: &[usize],
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<SymbolMatrix> {
    spec.validate()?;
    if pattern.len() != d1.cols() {
        return Err(Error::DimensionMismatch(format!(
            "pattern of length {} for {} columns",
            pattern.len(),
            d1.cols()
        )));
    }
    check_permutation(sigma, d1.rows())?;
    if let Some(max) = d1.max_symbol() {
        if max as usize >= spec.alphabet_size() {
            return Err(Error::InvalidInput(format!(
                "symbol {} outside the alphabet",
                max as usize + 1
            )));
        }
    }
    let rows = spec
        .p_y_given_x()
        .iter()
        .map(|row| sampler(row))
        .collect::<Result<Vec<_>>>()?;
    let k = pattern.total();
    let mut data = vec![0; d1.rows() * k];
    for (i, x_row) in d1.row_iter().enumerate() {
        let out = &mut data[sigma[i] * k..(sigma[i] + 1) * k];
        let mut c = 0;
        for (&x, &s) in x_row.iter().zip(pattern.counts()) {
            for _ in 0..s {
                out[c] = rows[x as usize].sample(rng) as Symbol;
                c += 1;
            }
        }
    }
    SymbolMatrix::new(d1.rows(), k, data)
}

/// A batch of `lambda` seeds with the given repetition pattern. Seeds are
/// fresh rows, never rows of the databases themselves.
pub fn generate_seeds<R: Rng + ?Sized>(
    lambda: usize,
    n: usize,
    pattern: &RepetitionPattern,
    spec: &ModelSpec,
    row_rng: &mut R,
    channel_rng: &mut R,
) -> Result<SeedPair> {
    if lambda == 0 {
        return Err(Error::InvalidInput("seed count must be positive".into()));
    }
    let g1 = generate_database(lambda, n, spec, row_rng)?;
    let identity: Vec<usize> = (0..lambda).collect();
    let g2 = apply_channel(&g1, pattern, &identity, spec, channel_rng)?;
    Ok(SeedPair { g1, g2 })
}

/// A complete synthetic instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub pair: DatabasePair,
    pub seeds: SeedPair,
}

impl Instance {
    /// Draws every object from its own stream of `streams`.
    pub fn generate(
        spec: &ModelSpec,
        m: usize,
        n: usize,
        lambda: usize,
        streams: &Streams,
    ) -> Result<Self> {
        let pattern = draw_pattern(n, spec, &mut streams.rng(Stream::Pattern))?;
        Self::with_pattern(spec, m, lambda, pattern, streams)
    }

    /// Like [`Instance::generate`] but with a fixed repetition pattern.
    pub fn with_pattern(
        spec: &ModelSpec,
        m: usize,
        lambda: usize,
        pattern: RepetitionPattern,
        streams: &Streams,
    ) -> Result<Self> {
        let n = pattern.len();
        let d1 = generate_database(m, n, spec, &mut streams.rng(Stream::Database))?;
        let sigma = draw_permutation(m, &mut streams.rng(Stream::Permutation));
        let d2 = apply_channel(&d1, &pattern, &sigma, spec, &mut streams.rng(Stream::Channel))?;
        let seeds = generate_seeds(
            lambda,
            n,
            &pattern,
            spec,
            &mut streams.rng(Stream::SeedRows),
            &mut streams.rng(Stream::SeedChannel),
        )?;
        Ok(Self {
            pair: DatabasePair {
                d1,
                d2,
                sigma,
                pattern,
            },
            seeds,
        })
    }
}
