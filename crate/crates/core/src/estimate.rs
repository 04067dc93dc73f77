//! Plug-in estimates of `p_X`, `p_{Y|X}` and `p_S`, and the conditional
//! joint `p(x, y^s | s)` assembled from them.

use serde::{Deserialize, Serialize};

use crate::deletion::RetentionResult;
use crate::error::{Error, Result};
use crate::info::{check_enumeration, entropy};
use crate::matrix::SymbolMatrix;
use crate::synth::{ModelSpec, RepetitionPattern};

/// Empirical symbol frequencies over every entry of `g1`.
pub fn estimate_p_x(g1: &SymbolMatrix, alphabet_size: usize) -> Result<Vec<f64>> {
    if g1.as_slice().is_empty() {
        return Err(Error::InvalidInput("empty seed matrix".into()));
    }
    let mut counts = vec![0u64; alphabet_size];
    for &x in g1.as_slice() {
        *counts.get_mut(x as usize).ok_or_else(|| {
            Error::InvalidInput(format!("symbol {} outside the alphabet", x as usize + 1))
        })? += 1;
    }
    let total = g1.as_slice().len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Conditional estimate with rows for unseen inputs left at zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    pub matrix: Vec<Vec<f64>>,
    /// `unsupported[x]`: no aligned observation had input `x`.
    pub unsupported: Vec<bool>,
}

impl ConditionalEstimate {
    pub fn is_fully_supported(&self) -> bool {
        !self.unsupported.iter().any(|&u| u)
    }
}

/// Counts aligned `(x, y)` pairs between `g1` column `retained[j]` and
/// replica-free seed column `j`, normalized per input symbol `x`.
///
/// `pseudo_count` is added to every cell before normalizing; zero gives the
/// raw empirical conditional.
pub fn estimate_p_y_given_x(
    g1: &SymbolMatrix,
    g2_tilde: &SymbolMatrix,
    retention: &RetentionResult,
    alphabet_size: usize,
    pseudo_count: f64,
) -> Result<ConditionalEstimate> {
    let retained = &retention.retained;
    if retained.len() != g2_tilde.cols() || g1.rows() != g2_tilde.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} retained columns and {}x{} replica-free seeds for {} seed rows",
            retained.len(),
            g2_tilde.rows(),
            g2_tilde.cols(),
            g1.rows()
        )));
    }
    if let Some(&bad) = retained.iter().find(|&&r| r >= g1.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "retained column {bad} out of range"
        )));
    }
    if !(pseudo_count >= 0.0 && pseudo_count.is_finite()) {
        return Err(Error::InvalidInput(format!("pseudo-count {pseudo_count}")));
    }
    let q = alphabet_size;
    let mut counts = vec![vec![0u64; q]; q];
    for t in 0..g1.rows() {
        let (xs, ys) = (g1.row(t), g2_tilde.row(t));
        for (&r, &y) in retained.iter().zip(ys) {
            let (x, y) = (xs[r] as usize, y as usize);
            if x >= q || y >= q {
                return Err(Error::InvalidInput("seed symbol outside the alphabet".into()));
            }
            counts[x][y] += 1;
        }
    }
    let mut unsupported = vec![false; q];
    let matrix = counts
        .iter()
        .enumerate()
        .map(|(x, row)| {
            let total = row.iter().sum::<u64>() as f64 + pseudo_count * q as f64;
            if total == 0.0 {
                unsupported[x] = true;
                return vec![0.0; q];
            }
            row.iter().map(|&c| (c as f64 + pseudo_count) / total).collect()
        })
        .collect();
    Ok(ConditionalEstimate {
        matrix,
        unsupported,
    })
}

/// Empirical frequencies of the repetition counts over `{0, ..., max}`.
pub fn estimate_p_s(pattern: &RepetitionPattern) -> Result<Vec<f64>> {
    if pattern.is_empty() {
        return Err(Error::InvalidInput("empty repetition pattern".into()));
    }
    let mut p = vec![0.0; pattern.max_count() + 1];
    let w = 1.0 / pattern.len() as f64;
    for &s in pattern.counts() {
        p[s] += w;
    }
    Ok(p)
}

/// `p(x, y^s | s)` for one repetition count.
///
/// Entries are indexed by `x * |X|^s + code(y^s)`, where `code` reads
/// `(y_1, ..., y_s)` as a base-`|X|` number with `y_1` most significant. For
/// `s = 0` the single `y` cell is the erasure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub s: usize,
    pub probs: Vec<f64>,
    /// `p(y^s | s)`, indexed by code.
    pub y_marginal: Vec<f64>,
    pub h_joint: f64,
    pub h_y: f64,
}

impl JointTable {
    pub fn width(&self) -> usize {
        self.y_marginal.len()
    }

    pub fn prob(&self, x: usize, code: usize) -> f64 {
        self.probs[x * self.width() + code]
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    pub p_x: Vec<f64>,
    pub p_y_given_x: Vec<Vec<f64>>,
    pub unsupported: Vec<bool>,
    pub p_s: Vec<f64>,
    /// `tables[s]` is present whenever `p_s[s] > 0`.
    pub tables: Vec<Option<JointTable>>,
}

/// Builds `p(x, y^s | s) = p_X(x) prod_k p_{Y|X}(y_k | x)` for every `s`
/// with positive estimated probability, and `p_X(x)` alone for `s = 0`.
pub fn assemble_joint(
    p_x: &[f64],
    conditional: &ConditionalEstimate,
    p_s: &[f64],
) -> Result<DistributionEstimate> {
    let q = p_x.len();
    if conditional.matrix.len() != q || conditional.matrix.iter().any(|r| r.len() != q) {
        return Err(Error::DimensionMismatch(
            "conditional estimate does not match the alphabet".into(),
        ));
    }
    let mut tables = Vec::with_capacity(p_s.len());
    for (s, &ps) in p_s.iter().enumerate() {
        if ps <= 0.0 {
            tables.push(None);
            continue;
        }
        check_enumeration(q, s)?;
        let width = q.pow(s as u32);
        let mut probs = vec![0.0; q * width];
        for x in 0..q {
            let row = &mut probs[x * width..(x + 1) * width];
            row[0] = p_x[x];
            // Expand digit by digit so that code = code * q + y.
            let mut filled = 1;
            for _ in 0..s {
                for code in (0..filled).rev() {
                    let base = row[code];
                    for y in 0..q {
                        row[code * q + y] = base * conditional.matrix[x][y];
                    }
                }
                filled *= q;
            }
        }
        let mut y_marginal = vec![0.0; width];
        for x in 0..q {
            for (acc, p) in y_marginal.iter_mut().zip(&probs[x * width..(x + 1) * width]) {
                *acc += p;
            }
        }
        tables.push(Some(JointTable {
            s,
            h_joint: entropy(&probs),
            h_y: entropy(&y_marginal),
            probs,
            y_marginal,
        }));
    }
    Ok(DistributionEstimate {
        p_x: p_x.to_vec(),
        p_y_given_x: conditional.matrix.clone(),
        unsupported: conditional.unsupported.clone(),
        p_s: p_s.to_vec(),
        tables,
    })
}

impl DistributionEstimate {
    /// Tables built from the true model instead of seeds.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let conditional = ConditionalEstimate {
            matrix: spec.p_y_given_x().to_vec(),
            unsupported: vec![false; spec.alphabet_size()],
        };
        assemble_joint(spec.p_x(), &conditional, spec.p_s())
    }

    pub fn alphabet_size(&self) -> usize {
        self.p_x.len()
    }

    pub fn s_max(&self) -> usize {
        self.p_s.len().saturating_sub(1)
    }

    pub fn table(&self, s: usize) -> Option<&JointTable> {
        self.tables.get(s).and_then(Option::as_ref)
    }

    pub fn h_x(&self) -> f64 {
        entropy(&self.p_x)
    }

    fn weighted(&self, f: impl Fn(&JointTable) -> f64) -> f64 {
        self.tables
            .iter()
            .zip(&self.p_s)
            .filter_map(|(t, &p)| t.as_ref().map(|t| p * f(t)))
            .sum()
    }

    /// `H^(X, Y^S | S)`.
    pub fn h_joint(&self) -> f64 {
        self.weighted(|t| t.h_joint)
    }

    /// `H^(Y^S | S)`.
    pub fn h_y(&self) -> f64 {
        self.weighted(|t| t.h_y)
    }

    /// `I^(X; Y^S | S)`.
    pub fn mutual_information(&self) -> f64 {
        let hx = self.h_x();
        self.weighted(|t| hx + t.h_y - t.h_joint)
    }

    /// Pads `p_s` with zeros up to `s_max`.
    pub fn with_s_max(mut self, s_max: usize) -> Self {
        if self.p_s.len() <= s_max {
            self.p_s.resize(s_max + 1, 0.0);
            self.tables.resize(s_max + 1, None);
        }
        self
    }

    /// Serializes the component estimates with the model-file keys.
    pub fn to_toml(&self) -> Result<String> {
        let file = EstimateFile {
            alphabet_size: self.alphabet_size(),
            s_max: self.s_max(),
            p_x: self.p_x.clone(),
            p_y_given_x: self.p_y_given_x.clone(),
            p_s: self.p_s.clone(),
            unsupported: self.unsupported.clone(),
        };
        toml::to_string(&file).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: EstimateFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.p_x.len() != file.alphabet_size || file.p_s.len() != file.s_max + 1 {
            return Err(Error::Config(
                "alphabet_size or s_max disagrees with the vectors".into(),
            ));
        }
        let unsupported = if file.unsupported.is_empty() {
            vec![false; file.alphabet_size]
        } else {
            file.unsupported
        };
        assemble_joint(
            &file.p_x,
            &ConditionalEstimate {
                matrix: file.p_y_given_x,
                unsupported,
            },
            &file.p_s,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct EstimateFile {
    alphabet_size: usize,
    s_max: usize,
    p_x: Vec<f64>,
    p_y_given_x: Vec<Vec<f64>>,
    p_s: Vec<f64>,
    #[serde(default)]
    unsupported: Vec<bool>,
}
