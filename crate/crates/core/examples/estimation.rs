//! Plug-in estimates from the seeds compared against the true model.
//!
//! cargo run --release --example estimation

use deanon::info::{capacity, conditional_joint_entropy, total_variation};
use deanon::matching::StageStatus;
use deanon::{deanonymize, Distributions, Instance, MatchOptions, ModelSpec, Streams};

fn main() -> deanon::Result<()> {
    let spec = ModelSpec::symmetric(3, 0.85, vec![0.1, 0.7, 0.2])?;
    let inst = Instance::generate(&spec, 200, 60, 10_000, &Streams::new(8))?;
    let options = MatchOptions::new(3, spec.s_max()).with_epsilon(0.3);
    let run = deanonymize(&inst.pair.d1, &inst.pair.d2, &inst.seeds, &options, Distributions::Estimated)?;
    if run.stages.estimation != StageStatus::Ok {
        println!("estimation did not run: {:?}", run.stages);
        return Ok(());
    }
    let est = run.estimate.as_ref().unwrap();

    println!("p_X      est {:.4?}\n         true {:.4?}", est.p_x, spec.p_x());
    for (x, row) in est.p_y_given_x.iter().enumerate() {
        println!("p_Y|X={x} est {row:.4?}");
    }
    println!("p_S      est {:.4?}\n         true {:.4?}", est.p_s, spec.p_s());
    println!("TV(p_S) = {:.4}", total_variation(&est.p_s, spec.p_s()));
    println!(
        "H(X,Y^S|S): est {:.4}, true {:.4}",
        est.h_joint(),
        conditional_joint_entropy(&spec)
    );
    println!(
        "I(X;Y^S|S): est {:.4}, true {:.4}",
        est.mutual_information(),
        capacity(&spec)?.capacity
    );
    print!("\n{}", est.to_toml()?);
    Ok(())
}
