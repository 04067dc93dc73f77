//! Noisy replica detection without knowledge of the joint distribution.
//!
//! The running Hamming distance between adjacent labeled columns is a
//! two-component Binomial mixture: `Binom(m, p0)` when the columns come from
//! different source columns and `Binom(m, p1)` when they are replicas of the
//! same one, with `p0 > p1` whenever the databases are correlated. Both
//! parameters are recovered with Blischke's factorial-moment estimator and
//! the midpoint between them becomes the decision threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymbolMatrix;

/// Discriminants in `[-DISCRIMINANT_SLACK, 0)` are treated as zero.
pub const DISCRIMINANT_SLACK: f64 = 1e-9;

/// Overdispersion (in standard errors of the sample variance) a series must
/// show before it is treated as a genuine two-component mixture.
pub const DISPERSION_Z: f64 = 5.0;

/// `h[j]` counts the rows where labeled columns `j` and `j + 1` differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HammingSeries(pub Vec<u64>);

impl HammingSeries {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureEstimate {
    /// Independent-column component, the larger parameter.
    pub p0_hat: f64,
    /// Replica component.
    pub p1_hat: f64,
    pub tau: f64,
}

pub fn running_hamming(d2: &SymbolMatrix) -> HammingSeries {
    let k = d2.cols();
    if k < 2 {
        return HammingSeries(Vec::new());
    }
    let mut h = vec![0u64; k - 1];
    for row in d2.row_iter() {
        for (acc, w) in h.iter_mut().zip(row.windows(2)) {
            *acc += u64::from(w[0] != w[1]);
        }
    }
    HammingSeries(h)
}

/// Sample factorial moments `F_1, F_2, F_3`, where
/// `F_k = mean_j prod_{i<k} (h_j - i) / (m - i)`.
pub fn factorial_moments(h: &HammingSeries, m: usize) -> Result<[f64; 3]> {
    if h.is_empty() {
        return Err(Error::InvalidInput("empty Hamming series".into()));
    }
    if m < 3 {
        return Err(Error::InvalidInput(format!(
            "factorial moments need at least 3 rows, got {m}"
        )));
    }
    let m = m as f64;
    let mut f = [0.0; 3];
    for &v in h.values() {
        let v = v as f64;
        let a = v / m;
        let b = a * (v - 1.0) / (m - 1.0);
        let c = b * (v - 2.0) / (m - 2.0);
        f[0] += a;
        f[1] += b;
        f[2] += c;
    }
    let len = h.len() as f64;
    Ok(f.map(|x| x / len))
}

/// Blischke's moment estimator for a two-component Binomial mixture with
/// known trial count `m`.
///
/// `F_2 - F_1^2` equals the excess of the sample variance of `h` over the
/// Binomial variance `m F_1 (1 - F_1)`, scaled by `1 / (m (m - 1))`. A series
/// whose excess does not clear [`DISPERSION_Z`] standard errors is reported as
/// [`Error::SingleComponent`].
pub fn blischke_estimate(h: &HammingSeries, m: usize) -> Result<MixtureEstimate> {
    if h.len() < 2 {
        return Err(Error::InvalidInput(
            "mixture estimation needs at least two distances".into(),
        ));
    }
    let [f1, f2, f3] = factorial_moments(h, m)?;
    let excess = f2 - f1 * f1;
    let noise = DISPERSION_Z * (2.0 / h.len() as f64).sqrt() * f1 * (1.0 - f1) / (m as f64 - 1.0);
    if excess < noise.max(1e-12) {
        return Err(Error::SingleComponent);
    }
    let a = (f3 - f1 * f2) / excess;
    let mut disc = a * a - 4.0 * a * f1 + 4.0 * f2;
    if disc < 0.0 {
        if disc < -DISCRIMINANT_SLACK {
            return Err(Error::SingleComponent);
        }
        disc = 0.0;
    }
    let root = disc.sqrt();
    let hi = ((a + root) / 2.0).clamp(0.0, 1.0);
    let lo = ((a - root) / 2.0).clamp(0.0, 1.0);
    Ok(MixtureEstimate {
        p0_hat: hi,
        p1_hat: lo,
        tau: (hi + lo) / 2.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicaDetection {
    pub series: HammingSeries,
    pub estimate: MixtureEstimate,
    /// `is_replica[j]`: labeled columns `j` and `j + 1` are replicas.
    pub is_replica: Vec<bool>,
}

/// Flags adjacent labeled columns whose Hamming distance is at most `m tau`.
pub fn detect_replicas(d2: &SymbolMatrix) -> Result<ReplicaDetection> {
    let series = running_hamming(d2);
    if series.is_empty() {
        return Ok(ReplicaDetection {
            series,
            estimate: MixtureEstimate {
                p0_hat: 0.0,
                p1_hat: 0.0,
                tau: 0.0,
            },
            is_replica: Vec::new(),
        });
    }
    let m = d2.rows();
    let estimate = blischke_estimate(&series, m)?;
    let cut = m as f64 * estimate.tau;
    let is_replica = series.values().iter().map(|&h| h as f64 <= cut).collect();
    Ok(ReplicaDetection {
        series,
        estimate,
        is_replica,
    })
}

/// Run lengths of labeled columns joined by replica adjacencies.
pub fn replica_runs(is_replica: &[bool], columns: usize) -> Vec<usize> {
    if columns == 0 {
        return Vec::new();
    }
    let mut runs = vec![1];
    for &r in is_replica.iter().take(columns - 1) {
        if r {
            *runs.last_mut().unwrap() += 1;
        } else {
            runs.push(1);
        }
    }
    runs
}

/// First labeled column of every run.
pub fn run_representatives(is_replica: &[bool], columns: usize) -> Vec<usize> {
    let mut reps = Vec::new();
    let mut start = 0;
    for len in replica_runs(is_replica, columns) {
        reps.push(start);
        start += len;
    }
    reps
}
