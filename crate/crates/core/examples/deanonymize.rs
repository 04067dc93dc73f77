//! End-to-end de-anonymization with plug-in and with true distributions.
//!
//! cargo run --release --example deanonymize

use deanon::{capacity, deanonymize, Distributions, Instance, MatchOptions, ModelSpec, Streams};

fn main() -> deanon::Result<()> {
    let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0])?;
    let (m, n) = (4096, 60);
    println!(
        "R = {:.3}, capacity = {:.3}",
        (m as f64).log2() / n as f64,
        capacity(&spec)?.capacity
    );
    let inst = Instance::generate(&spec, m, n, 10_000, &Streams::new(1))?;
    let options = MatchOptions::new(2, 1).with_epsilon(0.3);

    for (label, dist) in [
        ("plug-in", Distributions::Estimated),
        ("known", Distributions::Known(&spec)),
    ] {
        let run = deanonymize(&inst.pair.d1, &inst.pair.d2, &inst.seeds, &options, dist)?;
        let matched = run.matching.as_ref().map_or(0, |r| r.matched());
        println!(
            "{label:>8}: row error rate {:.4}, {matched}/{m} rows matched",
            run.row_error_rate(&inst.pair.sigma)
        );
    }
    Ok(())
}
