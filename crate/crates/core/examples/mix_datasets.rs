//! Build mixing manifests and draw from them.
//!
//! ```text
//! cargo run -p steer-core --example mix_datasets
//! ```

use steer_core::pipeline::{build_mix, RelabelMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let even = build_mix(&[("tabletop.jsonl", 1.0), ("grasps.jsonl", 1.0)], RelabelMode::Augment)?;
    let sized = build_mix(&[("tabletop.jsonl", 70_000.0), ("grasps.jsonl", 15_000.0)], RelabelMode::Replace)?;
    println!("{}", serde_json::to_string_pretty(&even)?);
    println!("{}", serde_json::to_string_pretty(&sized)?);

    let draws: Vec<usize> = sized.sampler(1).take(20).collect();
    println!("first draws: {draws:?}");
    let n = 100_000;
    let first = sized.sampler(1).take(n).filter(|&i| i == 0).count();
    println!("share of tabletop.jsonl over {n} draws: {:.4}", first as f64 / n as f64);

    match build_mix(&[("a", 0.0), ("b", 0.0)], RelabelMode::Augment) {
        Ok(_) => unreachable!(),
        Err(e) => println!("all-zero weights: {e}"),
    }
    Ok(())
}
