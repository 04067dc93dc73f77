//! Exact information quantities of a [`ModelSpec`]. All logarithms are base 2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::deletion::Remapping;
use crate::error::{Error, Result};
use crate::synth::ModelSpec;

/// Upper bound on `|X|^(s+1)` for exhaustive enumeration over `(x, y^s)`.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// `p log2 p` with `0 log 0 = 0`.
#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().copied().map(plogp).sum::<f64>()
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// Bernoulli relative entropy `D(p || q)` in bits; `+inf` when `q` is 0 or 1
/// and `p` differs from it.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    fn term(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).log2()
        }
    }
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Total-variation distance between two vectors over the same support; the
/// shorter one is padded with zeros.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

pub(crate) fn check_enumeration(alphabet: usize, s: usize) -> Result<()> {
    let cells = (alphabet as u128).checked_pow(s as u32 + 1).unwrap_or(u128::MAX);
    if cells > ENUMERATION_LIMIT {
        return Err(Error::EnumerationInfeasible {
            cells,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Output distribution of `Y^s`, indexed by the base-`|X|` code of
/// `(y_1, ..., y_s)` with `y_1` most significant.
pub fn replica_output_distribution(p_x: &[f64], channel: &[Vec<f64>], s: usize) -> Vec<f64> {
    let q = p_x.len();
    // Start from p_X and expand one replica at a time, tracking p(x, y^t).
    let mut joint: Vec<f64> = p_x.to_vec();
    let mut width = 1;
    for _ in 0..s {
        let mut next = vec![0.0; joint.len() * q];
        for x in 0..q {
            for code in 0..width {
                let base = joint[x * width + code];
                for y in 0..q {
                    next[x * width * q + code * q + y] = base * channel[x][y];
                }
            }
        }
        joint = next;
        width *= q;
    }
    let mut out = vec![0.0; width];
    for x in 0..q {
        for (acc, p) in out.iter_mut().zip(&joint[x * width..(x + 1) * width]) {
            *acc += p;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// `I(X; Y^S | S)` in bits.
    pub capacity: f64,
    /// `I(X; Y^s)` for each `s` in `0..=s_max`.
    pub per_s: BTreeMap<usize, f64>,
    pub h_x: f64,
    pub h_s: f64,
}

/// Matching capacity `I(X; Y^S | S) = sum_s p_S(s) I(X; Y^s)`.
///
/// `I(X; Y^s)` is evaluated as `H(Y^s) - s H(Y|X)`, enumerating the
/// distribution of `Y^s`.
pub fn capacity(spec: &ModelSpec) -> Result<CapacityReport> {
    spec.validate()?;
    check_enumeration(spec.alphabet_size(), spec.s_max())?;
    let h_y_given_x: f64 = spec
        .p_x()
        .iter()
        .zip(spec.p_y_given_x())
        .map(|(px, row)| px * entropy(row))
        .sum();
    let mut per_s = BTreeMap::new();
    let mut total = 0.0;
    for (s, &ps) in spec.p_s().iter().enumerate() {
        let mi = if s == 0 {
            0.0
        } else {
            let out = replica_output_distribution(spec.p_x(), spec.p_y_given_x(), s);
            (entropy(&out) - s as f64 * h_y_given_x).max(0.0)
        };
        per_s.insert(s, mi);
        total += ps * mi;
    }
    Ok(CapacityReport {
        capacity: total,
        per_s,
        h_x: entropy(spec.p_x()),
        h_s: entropy(spec.p_s()),
    })
}

/// `H(X, Y^S | S) = H(X) + E[S] H(Y|X)`.
pub fn conditional_joint_entropy(spec: &ModelSpec) -> f64 {
    let h_y_given_x: f64 = spec
        .p_x()
        .iter()
        .zip(spec.p_y_given_x())
        .map(|(px, row)| px * entropy(row))
        .sum();
    entropy(spec.p_x()) + spec.mean_repetition() * h_y_given_x
}

/// True parameters of the Binomial mixtures seen by both detectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureTruth {
    /// Mismatch probability between independent labeled columns.
    pub p0: f64,
    /// Mismatch probability between replicas.
    pub p1: f64,
    /// Seed mismatch probability under the remapping, independent columns.
    pub q0: f64,
    /// Seed mismatch probability under the remapping, matching columns.
    pub q1: f64,
    /// Limit of the independent-pair fraction, `(1 - delta) / E[S]`.
    pub alpha_limit: Option<f64>,
}

pub fn mixture_truth(spec: &ModelSpec, phi: Option<&Remapping>) -> MixtureTruth {
    let q = spec.alphabet_size();
    let p_y = spec.p_y();
    let p0 = 1.0 - p_y.iter().map(|p| p * p).sum::<f64>();
    let p1 = 1.0
        - spec
            .p_x()
            .iter()
            .zip(spec.p_y_given_x())
            .map(|(px, row)| px * row.iter().map(|p| p * p).sum::<f64>())
            .sum::<f64>();
    let identity = Remapping::identity(q);
    let phi = phi.unwrap_or(&identity);
    // preimage[x] = y with phi(y) = x
    let mut preimage = vec![0usize; q];
    for y in 0..q {
        preimage[phi.apply(y as u8) as usize] = y;
    }
    let mut q0 = 1.0;
    let mut q1 = 1.0;
    for x in 0..q {
        let px = spec.p_x()[x];
        q0 -= px * p_y[preimage[x]];
        q1 -= px * spec.p_y_given_x()[x][preimage[x]];
    }
    let mean = spec.mean_repetition();
    MixtureTruth {
        p0,
        p1,
        q0,
        q1,
        alpha_limit: (mean > 0.0).then(|| (1.0 - spec.delta()) / mean),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert!((entropy(&[0.9, 0.1]) - 0.4690).abs() < 5e-5);
    }

    #[test]
    fn kl_values() {
        assert_eq!(bernoulli_kl(0.3, 0.3), 0.0);
        assert!((bernoulli_kl(0.5, 0.25) - 0.2075).abs() < 5e-5);
        assert!(bernoulli_kl(0.5, 0.0).is_infinite());
        assert!(bernoulli_kl(0.5, 1.0).is_infinite());
        assert_eq!(bernoulli_kl(0.0, 0.0), 0.0);
        assert_eq!(bernoulli_kl(1.0, 1.0), 0.0);
    }

    #[test]
    fn capacity_edge_cases() {
        let all_deleted = ModelSpec::bsc(0.1, vec![1.0]).unwrap();
        assert_eq!(capacity(&all_deleted).unwrap().capacity, 0.0);

        let bsc = ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap();
        let c = capacity(&bsc).unwrap();
        assert!((c.capacity - (1.0 - binary_entropy(0.1))).abs() < 1e-12);
        assert!((c.capacity - 0.5310).abs() < 5e-5);

        let independent = ModelSpec::new(
            vec![0.3, 0.7],
            vec![vec![0.4, 0.6], vec![0.4, 0.6]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        assert!(capacity(&independent).unwrap().capacity.abs() < 1e-12);
    }

    #[test]
    fn capacity_enumeration_cap() {
        let mut p_s = vec![0.0; 12];
        p_s[11] = 1.0;
        let spec = ModelSpec::symmetric(8, 0.5, p_s).unwrap();
        assert!(matches!(capacity(&spec), Err(Error::EnumerationInfeasible { .. })));
    }

    #[test]
    fn per_s_monotone_and_zero_at_zero() {
        let spec = ModelSpec::bsc(0.2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = capacity(&spec).unwrap();
        assert_eq!(c.per_s[&0], 0.0);
        let v: Vec<f64> = c.per_s.values().copied().collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        let total: f64 = spec.p_s().iter().zip(&v).map(|(p, i)| p * i).sum();
        assert!((total - c.capacity).abs() < 1e-12);
    }

    #[test]
    fn bsc_mixture_parameters() {
        let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap();
        let t = mixture_truth(&spec, None);
        assert!((t.p0 - 0.5).abs() < 1e-12);
        assert!((t.p1 - 0.18).abs() < 1e-12);
        assert!((t.q0 - 0.5).abs() < 1e-12);
        assert!((t.q1 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unit_trace_channel() {
        let third = 1.0 / 3.0;
        let spec = ModelSpec::new(
            vec![third; 3],
            vec![
                vec![third, 2.0 * third, 0.0],
                vec![0.0, third, 2.0 * third],
                vec![2.0 * third, 0.0, third],
            ],
            vec![0.3, 0.7],
        )
        .unwrap();
        let t = mixture_truth(&spec, None);
        assert!((t.q0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.q1 - 2.0 / 3.0).abs() < 1e-12);
        let shift = Remapping::new(vec![1, 2, 0]).unwrap();
        let t = mixture_truth(&spec, Some(&shift));
        assert!((t.q0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.q1 - 1.0).abs() < 1e-12);
        assert!((t.alpha_limit.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_databases_have_equal_components() {
        let spec = ModelSpec::new(
            vec![0.3, 0.7],
            vec![vec![0.4, 0.6], vec![0.4, 0.6]],
            vec![0.0, 1.0],
        )
        .unwrap();
        let t = mixture_truth(&spec, None);
        assert!((t.p0 - t.p1).abs() < 1e-12);
    }

    #[test]
    fn ten_column_channel_parameters() {
        let spec = ModelSpec::symmetric(4, 0.08, vec![0.3, 0.7]).unwrap();
        let t = mixture_truth(&spec, None);
        assert!((t.q0 - 0.75).abs() < 1e-12);
        assert!((t.q1 - 0.92).abs() < 1e-12);
    }

    #[test]
    fn tv_pads() {
        assert!((total_variation(&[0.5, 0.5], &[1.0]) - 0.5).abs() < 1e-15);
    }
}
