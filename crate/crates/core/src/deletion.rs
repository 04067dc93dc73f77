//! Seeded deletion detection by outlier search over alphabet remappings.
//!
//! For a useful remapping `phi`, column `j` of the cross-distance matrix
//! `L(phi)` between the seed columns holds exactly one entry from a
//! different Binomial component, the one whose `G1` column is the source of
//! `G2` column `j`. That entry is the only one far from the grand mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Symbol, SymbolMatrix};

/// Largest alphabet for which the full symmetric group is swept.
pub const MAX_SWEEP_ALPHABET: usize = 8;

/// Default multiplier of the outlier threshold.
pub const DEFAULT_THRESHOLD_CONSTANT: f64 = 2.0;

/// A bijection on the alphabet; `phi[y]` is the image of symbol `y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Remapping(Vec<Symbol>);

impl Remapping {
    pub fn identity(size: usize) -> Self {
        Self((0..size).map(|y| y as Symbol).collect())
    }

    pub fn new(images: Vec<Symbol>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &y in &images {
            let slot = seen.get_mut(y as usize).ok_or_else(|| {
                Error::InvalidInput(format!("remapping image {} out of range", y as usize + 1))
            })?;
            if std::mem::replace(slot, true) {
                return Err(Error::InvalidInput("remapping is not a bijection".into()));
            }
        }
        Ok(Self(images))
    }

    pub fn images(&self) -> &[Symbol] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, y: Symbol) -> Symbol {
        self.0[y as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &y)| i == y as usize)
    }
}

/// All `size!` remappings in lexicographic order, identity first.
pub fn enumerate_remappings(size: usize) -> Result<Vec<Remapping>> {
    if size > MAX_SWEEP_ALPHABET {
        return Err(Error::AlphabetTooLarge(size));
    }
    let mut current: Vec<Symbol> = (0..size).map(|y| y as Symbol).collect();
    let mut out = vec![Remapping(current.clone())];
    while next_permutation(&mut current) {
        out.push(Remapping(current.clone()));
    }
    Ok(out)
}

fn next_permutation(v: &mut [Symbol]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// `L(phi)` with `n` rows (columns of `G1`) and `k` columns (columns of `G2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossDistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<u32>,
    /// Grand mean of all entries.
    pub mu: f64,
}

impl CrossDistanceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.values[i * self.cols + j]
    }

    /// `|L[i][j] - mu|`.
    pub fn deviation(&self, i: usize, j: usize) -> f64 {
        (self.get(i, j) as f64 - self.mu).abs()
    }

    /// CSV with one line per `G1` column, `G2` columns across.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Hamming distances between every column of `g1` and every `phi`-mapped
/// column of `g2`.
pub fn cross_hamming(
    g1: &SymbolMatrix,
    g2: &SymbolMatrix,
    phi: &Remapping,
) -> Result<CrossDistanceMatrix> {
    if g1.rows() != g2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "seed matrices have {} and {} rows",
            g1.rows(),
            g2.rows()
        )));
    }
    let alphabet = phi.images().len();
    if [g1.max_symbol(), g2.max_symbol()]
        .into_iter()
        .flatten()
        .any(|s| s as usize >= alphabet)
    {
        return Err(Error::InvalidInput(
            "seed symbol outside the remapping's alphabet".into(),
        ));
    }
    let (n, k) = (g1.cols(), g2.cols());
    let mut values = vec![0u32; n * k];
    let mut mapped = vec![0 as Symbol; k];
    for t in 0..g1.rows() {
        for (dst, &y) in mapped.iter_mut().zip(g2.row(t)) {
            *dst = phi.apply(y);
        }
        for (i, &x) in g1.row(t).iter().enumerate() {
            let out = &mut values[i * k..(i + 1) * k];
            for (acc, &y) in out.iter_mut().zip(&mapped) {
                *acc += u32::from(x != y);
            }
        }
    }
    let mu = if values.is_empty() {
        0.0
    } else {
        values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
    };
    Ok(CrossDistanceMatrix {
        rows: n,
        cols: k,
        values,
        mu,
    })
}

/// `constant * lambda^(2/3) * (log2 n)^(1/3)`.
pub fn outlier_threshold(lambda: usize, n: usize, constant: f64) -> f64 {
    constant * (lambda as f64).powf(2.0 / 3.0) * (n as f64).log2().cbrt()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetentionResult {
    /// Source columns that survived, strictly increasing; entry `j` is the
    /// source of replica-free seed column `j`.
    pub retained: Vec<usize>,
    pub deleted: Vec<usize>,
}

impl RetentionResult {
    pub fn from_retained(retained: Vec<usize>, n: usize) -> Self {
        let deleted = (0..n).filter(|i| retained.binary_search(i).is_err()).collect();
        Self { retained, deleted }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeletionDetection {
    pub retention: RetentionResult,
    pub remapping: Remapping,
    pub distances: CrossDistanceMatrix,
    pub threshold: f64,
}

/// Infers the retained source columns from seeds whose labeled side has one
/// column per retained source column.
///
/// Remappings are tried in lexicographic order. A remapping is skipped as
/// useless as soon as some column shows no outlier; a column with more than
/// one outlier is a misdetection.
pub fn detect_deletions(
    g1: &SymbolMatrix,
    g2: &SymbolMatrix,
    alphabet_size: usize,
    threshold_constant: f64,
) -> Result<DeletionDetection> {
    let (lambda, n, k) = (g1.rows(), g1.cols(), g2.cols());
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "deletion detection needs at least 3 source columns, got {n}"
        )));
    }
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "{k} labeled seed columns exceed {n} source columns"
        )));
    }
    let threshold = outlier_threshold(lambda, n, threshold_constant);
    'sweep: for phi in enumerate_remappings(alphabet_size)? {
        let distances = cross_hamming(g1, g2, &phi)?;
        let mut retained = Vec::with_capacity(k);
        for j in 0..k {
            let mut hit = None;
            for i in 0..n {
                if distances.deviation(i, j) > threshold {
                    if hit.is_some() {
                        return Err(Error::Misdetection { column: j });
                    }
                    hit = Some(i);
                }
            }
            match hit {
                Some(i) => retained.push(i),
                None => continue 'sweep,
            }
        }
        if retained.windows(2).any(|w| w[0] >= w[1]) {
            let column = retained.windows(2).position(|w| w[0] >= w[1]).unwrap() + 1;
            return Err(Error::Misdetection { column });
        }
        return Ok(DeletionDetection {
            retention: RetentionResult::from_retained(retained, n),
            remapping: phi,
            distances,
            threshold,
        });
    }
    Err(Error::AllRemappingsUseless)
}
