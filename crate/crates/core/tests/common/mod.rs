//! Oracles shared by integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use deanon::ModelSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `I(X; Y^S | S)` summed over every outcome `(s, x, y_1..y_s)`.
pub fn brute_force_capacity(spec: &ModelSpec) -> f64 {
    let q = spec.alphabet_size();
    let mut total = 0.0;
    for (s, &ps) in spec.p_s().iter().enumerate() {
        if ps == 0.0 || s == 0 {
            continue;
        }
        let mut joint: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
        let mut ys = vec![0usize; s];
        loop {
            for x in 0..q {
                let p = spec.p_x()[x] * ys.iter().map(|&y| spec.p_y_given_x()[x][y]).product::<f64>();
                joint.insert((x, ys.clone()), p);
            }
            let mut k = 0;
            while k < s && ys[k] == q - 1 {
                ys[k] = 0;
                k += 1;
            }
            if k == s {
                break;
            }
            ys[k] += 1;
        }
        let mut p_y: HashMap<Vec<usize>, f64> = HashMap::new();
        for ((_, y), p) in &joint {
            *p_y.entry(y.clone()).or_default() += p;
        }
        let i: f64 = joint
            .iter()
            .filter(|(_, &p)| p > 0.0)
            .map(|((x, y), &p)| p * (p / (spec.p_x()[*x] * p_y[y])).log2())
            .sum();
        total += ps * i;
    }
    total
}

pub fn random_simplex(rng: &mut ChaCha8Rng, len: usize, zero_prob: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len)
        .map(|_| if rng.random::<f64>() < zero_prob { 0.0 } else { rng.random::<f64>() + 0.01 })
        .collect();
    if v.iter().all(|&p| p == 0.0) {
        v[0] = 1.0;
    }
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= sum);
    v
}

pub fn random_spec(rng: &mut ChaCha8Rng, q: usize, s_max: usize) -> ModelSpec {
    let p_x = random_simplex(rng, q, 0.0);
    let channel = (0..q).map(|_| random_simplex(rng, q, 0.3)).collect();
    let p_s = random_simplex(rng, s_max + 1, 0.2);
    ModelSpec::new(p_x, channel, p_s).unwrap()
}
