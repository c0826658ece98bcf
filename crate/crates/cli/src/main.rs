//! `steer`: corpus annotation, statistics, mixing, synthesis and the
//! session service.
//!
//! Exit codes: 0 success, 1 fatal error, 2 usage error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use steer_core::geometry::{anchors_to_jsonl, build_anchor_set};
use steer_core::pipeline::{annotate_corpus, build_mix, corpus_stats, RelabelMode};
use steer_core::segmenter::SegmenterConfig;
use steer_core::sim::synth::{synth_corpus, CorpusSpec};
use steer_gateway::GatewayConfig;

#[derive(Parser)]
#[command(name = "steer", version, about = "Relabel manipulation demonstrations and serve the tabletop simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment every episode of a corpus into relabeled skill segments.
    Annotate(AnnotateArgs),
    /// Recompute the report for a segment file.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a normalized mixing manifest.
    Mix {
        /// Corpus and weight, e.g. `tabletop.jsonl:70000`. Repeatable.
        #[arg(long = "source", value_name = "PATH:WEIGHT", required = true, value_parser = parse_source)]
        sources: Vec<(String, f64)>,
        #[arg(long)]
        output: PathBuf,
        /// augment or replace.
        #[arg(long, default_value = "augment", value_parser = parse_relabel_mode)]
        relabel_mode: RelabelMode,
    },
    /// Print the grasp anchor legend, one JSON object per line.
    Anchors,
    /// Generate a synthetic episode corpus from a corpus spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the HTTP and WebSocket session service.
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory for session files and planner memory.
        #[arg(long)]
        persist: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AnnotateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// TOML file with `workers` and a `[segmenter]` table. Flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    open_threshold: Option<f64>,
    #[arg(long)]
    closed_threshold: Option<f64>,
    #[arg(long)]
    reorient_dwell: Option<usize>,
    #[arg(long)]
    lift_height: Option<f64>,
    #[arg(long)]
    smoothing_window: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotateConfig {
    workers: Option<usize>,
    #[serde(default)]
    segmenter: SegmenterConfig,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn fatal(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

fn parse_source(s: &str) -> Result<(String, f64), String> {
    let (path, weight) = s.rsplit_once(':').ok_or("expected PATH:WEIGHT")?;
    if path.is_empty() {
        return Err("empty path".into());
    }
    let weight: f64 = weight.parse().map_err(|_| format!("invalid weight {weight:?}"))?;
    Ok((path.to_string(), weight))
}

fn parse_relabel_mode(s: &str) -> Result<RelabelMode, String> {
    RelabelMode::parse(s).ok_or_else(|| format!("expected augment or replace, got {s:?}"))
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::fatal)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Failure::fatal(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn annotate(args: AnnotateArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::fatal(format!("{}: {e}", path.display())))?;
            toml::from_str::<AnnotateConfig>(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => AnnotateConfig::default(),
    };
    let seg = &mut config.segmenter;
    if let Some(v) = args.open_threshold {
        seg.open_threshold = v;
    }
    if let Some(v) = args.closed_threshold {
        seg.closed_threshold = v;
    }
    if let Some(v) = args.reorient_dwell {
        seg.reorient_dwell = v;
    }
    if let Some(v) = args.lift_height {
        seg.lift_height = v;
    }
    if let Some(v) = args.smoothing_window {
        seg.smoothing_window = v;
    }
    seg.validate().map_err(Failure::usage)?;
    let workers = args
        .workers
        .map(|w| w as usize)
        .or(config.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Failure::usage("workers must be at least 1"));
    }
    let report = annotate_corpus(&args.input, &args.output, &config.segmenter, workers).map_err(Failure::fatal)?;
    eprintln!(
        "{} of {} episodes segmented into {} segments with {} workers in {:.2} s",
        report.episodes_segmented, report.episodes_in, report.segments_out, workers, report.wall_time
    );
    write_json(args.report.as_deref(), &report)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Annotate(args) => annotate(args),
        Command::Stats { input } => write_json(None, &corpus_stats(&input).map_err(Failure::fatal)?),
        Command::Mix {
            sources,
            output,
            relabel_mode,
        } => {
            let manifest = build_mix(&sources, relabel_mode).map_err(Failure::usage)?;
            write_json(Some(&output), &manifest)
        }
        Command::Anchors => {
            print!("{}", anchors_to_jsonl(&build_anchor_set()));
            Ok(())
        }
        Command::Synth {
            spec,
            count,
            seed,
            output,
        } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| Failure::fatal(format!("{}: {e}", spec.display())))?;
            let spec = CorpusSpec::from_json(&text).map_err(Failure::usage)?;
            let file = File::create(&output).map_err(|e| Failure::fatal(format!("{}: {e}", output.display())))?;
            let mut sink = BufWriter::new(file);
            let counts = synth_corpus(&spec, count, seed, &mut sink).map_err(Failure::fatal)?;
            sink.flush().map_err(Failure::fatal)?;
            for (name, n) in counts {
                eprintln!("{name}: {n}");
            }
            Ok(())
        }
        Command::Serve { port, host, persist } => {
            let config = GatewayConfig {
                persist_dir: persist,
                ..Default::default()
            }
            .with_planner_env();
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new().map_err(Failure::fatal)?;
            eprintln!("listening on http://{addr}");
            runtime.block_on(steer_gateway::serve(addr, config)).map_err(Failure::fatal)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("steer: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
