//! Row error rate as the growth rate R crosses the capacity.
//!
//! cargo run --release --example phase_transition

use deanon::harness::{run_experiment, Sweep, SweepAxis};
use deanon::{ExperimentConfig, ModelSpec};

fn main() -> deanon::Result<()> {
    let spec = ModelSpec::bsc(0.1, vec![0.0, 1.0])?;
    let mut config = ExperimentConfig::new(spec, 4096, 60, 10_000);
    config.epsilon = 0.3;
    config.trials = 4;
    config.master_seed = 2024;
    config.sweep = Some(Sweep {
        axis: SweepAxis::N,
        values: vec![12, 20, 30, 60],
    });
    let report = run_experiment(&config)?;
    println!("capacity = {:.4}", report.capacity.capacity);
    println!("{:>4} {:>7} {:>10} {:>18}", "n", "R", "row error", "95% CI (pooled)");
    for p in &report.points {
        let (lo, hi) = p.row_errors.interval;
        println!(
            "{:>4} {:>7.3} {:>10.4}     [{lo:.4}, {hi:.4}]",
            p.n, p.rate, p.mean_row_error_rate
        );
    }
    Ok(())
}
