//! Deletion detection with columns 4, 6 and 10 (1-based) of 10 deleted and
//! 10^4 seed rows.
//!
//! Writes the cross-distance matrix to `distances.csv`; the deleted
//! columns show up as rows without an outlier.
//!
//! cargo run --release --example deletion_detection

use deanon::deletion::DEFAULT_THRESHOLD_CONSTANT;
use deanon::info::mixture_truth;
use deanon::{detect_deletions, Instance, ModelSpec, RepetitionPattern, Streams};

fn main() -> deanon::Result<()> {
    // Uniform quaternary X, P(Y = X) = 0.08: q0 = 0.75, q1 = 0.92.
    let spec = ModelSpec::symmetric(4, 0.08, vec![0.3, 0.7])?;
    let t = mixture_truth(&spec, None);
    println!("q0 = {:.4}, q1 = {:.4}", t.q0, t.q1);

    let pattern = RepetitionPattern::new(vec![1, 1, 1, 0, 1, 0, 1, 1, 1, 0]);
    let inst = Instance::with_pattern(&spec, 10, 10_000, pattern.clone(), &Streams::new(3))?;
    let det = detect_deletions(&inst.seeds.g1, &inst.seeds.g2, 4, DEFAULT_THRESHOLD_CONSTANT)?;

    println!("threshold = {:.1}, mu = {:.1}", det.threshold, det.distances.mu);
    println!("detected deleted = {:?}", det.retention.deleted);
    println!("actual deleted   = {:?}", pattern.deleted());
    std::fs::write("distances.csv", det.distances.to_csv()).expect("write distances.csv");
    println!("wrote distances.csv");
    Ok(())
}
