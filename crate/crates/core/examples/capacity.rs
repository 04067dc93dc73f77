//! Matching capacity for a few models.
//!
//! cargo run --example capacity

use deanon::info::binary_entropy;
use deanon::{capacity, ModelSpec};

fn main() -> deanon::Result<()> {
    let bsc = ModelSpec::bsc(0.1, vec![0.0, 1.0])?;
    println!(
        "BSC(0.1), no repetitions: {:.6} (1 - h(0.1) = {:.6})",
        capacity(&bsc)?.capacity,
        1.0 - binary_entropy(0.1)
    );

    for p_s in [vec![0.2, 0.8], vec![0.2, 0.4, 0.4], vec![0.0, 0.0, 0.0, 1.0]] {
        let spec = ModelSpec::bsc(0.1, p_s.clone())?;
        let report = capacity(&spec)?;
        println!("BSC(0.1), p_S = {p_s:?}: {:.6}", report.capacity);
        for (s, i) in &report.per_s {
            println!("    I(X;Y^{s}) = {i:.6}");
        }
    }

    let erasure_only = ModelSpec::symmetric(4, 1.0, vec![0.25, 0.75])?;
    println!(
        "noiseless quaternary, delta = 0.25: {:.6}",
        capacity(&erasure_only)?.capacity
    );
    Ok(())
}
