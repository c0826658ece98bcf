//! Generate a synthetic corpus from a weighted spec and print its mix.
//!
//! ```text
//! cargo run -p steer-core --example synth_corpus -- [COUNT] [SEED]
//! ```

use std::io::{self, Write};

use steer_core::sim::synth::{synth_corpus, CorpusSpec};

const SPEC: &str = include_str!("../data/corpus_spec.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let spec = CorpusSpec::from_json(SPEC)?;
    let mut buffer = Vec::new();
    let counts = synth_corpus(&spec, count, seed, &mut buffer)?;
    let text = String::from_utf8(buffer)?;
    let first = text.lines().next().unwrap_or_default();
    let mut out = io::stdout().lock();
    writeln!(out, "{count} episodes, {} bytes, per family {counts:?}", text.len())?;
    writeln!(out, "first record: {}...", &first[..first.len().min(160)])?;
    Ok(())
}
