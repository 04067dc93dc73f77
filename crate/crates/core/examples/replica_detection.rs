//! Replica detection on a binary database with repeated columns.
//!
//! cargo run --release --example replica_detection

use deanon::info::mixture_truth;
use deanon::{detect_replicas, Instance, ModelSpec, Streams};

fn main() -> deanon::Result<()> {
    let spec = ModelSpec::bsc(0.1, vec![1.0 / 3.0; 3])?;
    let inst = Instance::generate(&spec, 2000, 100, 1, &Streams::new(5))?;
    let d2 = &inst.pair.d2;

    let det = detect_replicas(d2)?;
    let truth = mixture_truth(&spec, None);
    let e = det.estimate;
    println!("p0: estimated {:.4}, true {:.4}", e.p0_hat, truth.p0);
    println!("p1: estimated {:.4}, true {:.4}", e.p1_hat, truth.p1);
    println!("threshold m*tau = {:.1}", e.tau * d2.rows() as f64);

    let actual = inst.pair.pattern.replica_adjacency();
    let wrong = det.is_replica.iter().zip(&actual).filter(|(a, b)| a != b).count();
    println!(
        "{} adjacent pairs, {} replicas, {} wrong decisions",
        actual.len(),
        actual.iter().filter(|&&r| r).count(),
        wrong
    );
    Ok(())
}
