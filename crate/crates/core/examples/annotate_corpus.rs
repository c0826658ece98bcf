//! Synthesize a corpus of pour demonstrations and relabel it.
//!
//! ```text
//! cargo run --release -p steer-core --example annotate_corpus -- [COUNT] [WORKERS]
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use steer_core::pipeline::annotate_corpus;
use steer_core::segmenter::SegmenterConfig;
use steer_core::sim::synth::{synth_corpus, CorpusSpec, NoiseConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2_000);
    let workers: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);

    let dir = tempfile_dir()?;
    let input = dir.join("episodes.jsonl");
    let output = dir.join("segments.jsonl");

    // Five skills of 20 steps each: 100 steps per episode.
    let mut spec = CorpusSpec::single(
        "pour",
        "pick {object}",
        &["grasp:side", "lift", "reorient:to_horizontal", "reorient:to_upright", "place"],
        &["pink cup", "coke can", "water bottle"],
    );
    spec.noise = NoiseConfig::JITTER;

    let t = Instant::now();
    let mut sink = BufWriter::new(File::create(&input)?);
    synth_corpus(&spec, count, 7, &mut sink)?;
    drop(sink);
    let bytes = std::fs::metadata(&input)?.len();
    println!("synthesized {count} episodes ({:.1} MB) in {:.2?}", bytes as f64 / 1e6, t.elapsed());

    let report = annotate_corpus(&input, &output, &SegmenterConfig::default(), workers)?;
    println!(
        "annotated with {workers} workers in {:.2} s: {} segmented, {} segments, {} diagnostics",
        report.wall_time,
        report.episodes_segmented,
        report.segments_out,
        report.diagnostics.len()
    );
    for (kind, n) in &report.per_kind {
        println!("  {kind:?}: {n}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("steer-annotate-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
