//! Draws a small instance and prints both databases and the hidden truth.
//!
//! cargo run --example generate_pair

use deanon::{Instance, ModelSpec, Streams};

fn main() -> deanon::Result<()> {
    // Ternary symbols, 80% kept; columns deleted, kept or doubled.
    let spec = ModelSpec::symmetric(3, 0.8, vec![0.2, 0.5, 0.3])?;
    let inst = Instance::generate(&spec, 6, 5, 4, &Streams::new(11))?;
    let pair = &inst.pair;

    println!("pattern S = {:?}", pair.pattern.counts());
    println!("deleted   = {:?}", pair.pattern.deleted());
    println!("sigma     = {:?}", pair.sigma);
    println!("\nD1 ({}x{}):", pair.d1.rows(), pair.d1.cols());
    for row in pair.d1.row_iter() {
        println!("  {row:?}");
    }
    println!("\nD2 ({}x{}):", pair.d2.rows(), pair.d2.cols());
    for row in pair.d2.row_iter() {
        println!("  {row:?}");
    }
    println!(
        "\nseeds: G1 {}x{}, G2 {}x{}",
        inst.seeds.g1.rows(),
        inst.seeds.g1.cols(),
        inst.seeds.g2.rows(),
        inst.seeds.g2.cols()
    );
    Ok(())
}
