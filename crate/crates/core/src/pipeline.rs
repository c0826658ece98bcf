//! Corpus-level annotation, statistics and dataset mixing.
//!
//! Annotation reads the input in chunks of lines, relabels each chunk's
//! episodes on a worker pool, and writes the results through a single
//! ordered sink, so the output bytes do not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{build_anchor_set, Anchor, GraspApproachClass};
use crate::instruction::{parse_instruction, InstructionError};
use crate::segmenter::{segment_episode, Diagnostic, DiagnosticCode, SegmenterConfig};
use crate::trajectory::{parse_episode_line, parse_segment_line, write_segments, Episode, SkillKind, SkillSegment};

/// Input lines handed to the worker pool at a time.
pub const CHUNK_LINES: usize = 256;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {source}")]
    Read {
        line: usize,
        #[source]
        source: io::Error,
    },
    #[error("write failed: {0}")]
    Write(#[source] io::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub episodes_in: usize,
    pub episodes_segmented: usize,
    pub segments_out: usize,
    pub per_kind: BTreeMap<SkillKind, usize>,
    pub per_class: BTreeMap<GraspApproachClass, usize>,
    pub diagnostics: Vec<Diagnostic>,
    /// Seconds.
    pub wall_time: f64,
}

impl Default for CorpusReport {
    fn default() -> Self {
        Self {
            episodes_in: 0,
            episodes_segmented: 0,
            segments_out: 0,
            per_kind: SkillKind::ALL.into_iter().map(|k| (k, 0)).collect(),
            per_class: GraspApproachClass::ALL.into_iter().map(|c| (c, 0)).collect(),
            diagnostics: Vec::new(),
            wall_time: 0.0,
        }
    }
}

impl CorpusReport {
    fn count_segments(&mut self, segments: &[SkillSegment]) {
        self.segments_out += segments.len();
        for s in segments {
            *self.per_kind.entry(s.kind).or_insert(0) += 1;
            if s.kind == SkillKind::Grasp {
                if let Some(class) = s.modifier.as_deref().and_then(GraspApproachClass::parse) {
                    *self.per_class.entry(class).or_insert(0) += 1;
                }
            }
        }
    }

    fn merge(&mut self, other: CorpusReport) {
        self.episodes_in += other.episodes_in;
        self.episodes_segmented += other.episodes_segmented;
        self.segments_out += other.segments_out;
        for (k, n) in other.per_kind {
            *self.per_kind.entry(k).or_insert(0) += n;
        }
        for (c, n) in other.per_class {
            *self.per_class.entry(c).or_insert(0) += n;
        }
        self.diagnostics.extend(other.diagnostics);
    }

    /// Counts for a kind, zero when absent.
    pub fn kind_count(&self, kind: SkillKind) -> usize {
        self.per_kind.get(&kind).copied().unwrap_or(0)
    }

    pub fn class_count(&self, class: GraspApproachClass) -> usize {
        self.per_class.get(&class).copied().unwrap_or(0)
    }

    /// Whether the segment-derived counts of two reports agree. Input
    /// episode totals and diagnostics are not recoverable from a segment
    /// file, so they are not compared.
    pub fn same_segment_counts(&self, other: &CorpusReport) -> bool {
        self.episodes_segmented == other.episodes_segmented
            && self.segments_out == other.segments_out
            && self.per_kind == other.per_kind
            && self.per_class == other.per_class
    }
}

fn instruction_diagnostic(episode: &Episode, e: InstructionError) -> Diagnostic {
    let code = match e {
        InstructionError::UnknownTemplate(_) => DiagnosticCode::UnknownTemplate,
        InstructionError::EmptySlot(_) => DiagnosticCode::EmptySlot,
    };
    Diagnostic {
        episode_id: episode.episode_id.clone(),
        code,
        detail: e.to_string(),
    }
}

/// Parses the episode's instruction and segments it.
pub fn relabel_episode(
    episode: &Episode,
    config: &SegmenterConfig,
    anchors: &[Anchor],
) -> Result<Vec<SkillSegment>, Diagnostic> {
    let parsed = parse_instruction(&episode.instruction).map_err(|e| instruction_diagnostic(episode, e))?;
    segment_episode(episode, &parsed, config, anchors)
}

struct LineResult {
    bytes: Vec<u8>,
    report: CorpusReport,
}

fn annotate_line(line_no: usize, text: &str, config: &SegmenterConfig, anchors: &[Anchor]) -> io::Result<LineResult> {
    let mut report = CorpusReport {
        episodes_in: 1,
        ..CorpusReport::default()
    };
    let mut bytes = Vec::new();
    match parse_episode_line(text) {
        Err(reason) => report.diagnostics.push(Diagnostic {
            episode_id: format!("line {line_no}"),
            code: DiagnosticCode::MalformedRecord,
            detail: reason,
        }),
        Ok(episode) => match relabel_episode(&episode, config, anchors) {
            Err(d) => report.diagnostics.push(d),
            Ok(segments) => {
                report.episodes_segmented = 1;
                report.count_segments(&segments);
                write_segments(&segments, &mut bytes)?;
            }
        },
    }
    Ok(LineResult { bytes, report })
}

fn read_chunk<R: BufRead>(
    source: &mut R,
    line_no: &mut usize,
    chunk: &mut Vec<(usize, String)>,
) -> Result<(), PipelineError> {
    chunk.clear();
    while chunk.len() < CHUNK_LINES {
        let mut buf = String::new();
        *line_no += 1;
        let n = source
            .read_line(&mut buf)
            .map_err(|source| PipelineError::Read { line: *line_no, source })?;
        if n == 0 {
            break;
        }
        if !buf.trim().is_empty() {
            chunk.push((*line_no, buf));
        }
    }
    Ok(())
}

/// Relabels every episode read from `source` and writes the segments to
/// `sink` in input order. Per-episode problems become diagnostics.
pub fn annotate_stream<R: BufRead, W: Write>(
    mut source: R,
    sink: &mut W,
    config: &SegmenterConfig,
    workers: usize,
) -> Result<CorpusReport, PipelineError> {
    let started = Instant::now();
    config.validate().map_err(PipelineError::Config)?;
    if workers == 0 {
        return Err(PipelineError::Config("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let anchors = build_anchor_set();
    let mut report = CorpusReport::default();
    let mut chunk = Vec::with_capacity(CHUNK_LINES);
    let mut line_no = 0;
    loop {
        read_chunk(&mut source, &mut line_no, &mut chunk)?;
        if chunk.is_empty() {
            break;
        }
        let results: Vec<LineResult> = pool
            .install(|| {
                chunk
                    .par_iter()
                    .map(|(n, text)| annotate_line(*n, text.trim(), config, &anchors))
                    .collect::<io::Result<Vec<_>>>()
            })
            .map_err(PipelineError::Write)?;
        for r in results {
            sink.write_all(&r.bytes).map_err(PipelineError::Write)?;
            report.merge(r.report);
        }
    }
    sink.flush().map_err(PipelineError::Write)?;
    report.wall_time = started.elapsed().as_secs_f64();
    Ok(report)
}

fn open(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path).map(|f| BufReader::with_capacity(1 << 20, f)).map_err(|source| PipelineError::Open {
        path: path.to_path_buf(),
        source,
    })
}

/// File-to-file [`annotate_stream`].
pub fn annotate_corpus(
    input: &Path,
    output: &Path,
    config: &SegmenterConfig,
    workers: usize,
) -> Result<CorpusReport, PipelineError> {
    let source = open(input)?;
    let file = File::create(output).map_err(|source| PipelineError::Open {
        path: output.to_path_buf(),
        source,
    })?;
    let mut sink = BufWriter::with_capacity(1 << 20, file);
    annotate_stream(source, &mut sink, config, workers)
}

/// Recomputes segment counts from a segment stream. Unparseable lines
/// become `malformed_record` diagnostics.
pub fn stats_stream<R: BufRead>(source: R) -> Result<CorpusReport, PipelineError> {
    let started = Instant::now();
    let mut report = CorpusReport::default();
    let mut episodes = BTreeSet::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|source| PipelineError::Read { line: i + 1, source })?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_segment_line(line.trim()) {
            Ok(segment) => {
                report.count_segments(std::slice::from_ref(&segment));
                episodes.insert(segment.episode_id);
            }
            Err(detail) => report.diagnostics.push(Diagnostic {
                episode_id: format!("line {}", i + 1),
                code: DiagnosticCode::MalformedRecord,
                detail,
            }),
        }
    }
    report.episodes_segmented = episodes.len();
    report.episodes_in = episodes.len();
    report.wall_time = started.elapsed().as_secs_f64();
    Ok(report)
}

pub fn corpus_stats(path: &Path) -> Result<CorpusReport, PipelineError> {
    stats_stream(open(path)?)
}

/// Whether mixed-in relabeled segments add to or stand in for the original
/// episode-level instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelabelMode {
    #[default]
    Augment,
    Replace,
}

impl RelabelMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "augment" => Some(RelabelMode::Augment),
            "replace" => Some(RelabelMode::Replace),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSource {
    pub path: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixManifest {
    pub sources: Vec<MixSource>,
    #[serde(default)]
    pub relabel_mode: RelabelMode,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixError {
    #[error("no sources")]
    NoSources,
    #[error("weight of {path:?} must be finite and non-negative, got {weight}")]
    BadWeight { path: String, weight: f64 },
    #[error("all weights are zero")]
    AllZero,
}

/// Normalizes source weights to sum to one.
pub fn build_mix<S: AsRef<str>>(sources: &[(S, f64)], relabel_mode: RelabelMode) -> Result<MixManifest, MixError> {
    if sources.is_empty() {
        return Err(MixError::NoSources);
    }
    for (path, weight) in sources {
        if !weight.is_finite() || *weight < 0.0 {
            return Err(MixError::BadWeight {
                path: path.as_ref().to_string(),
                weight: *weight,
            });
        }
    }
    let total: f64 = sources.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(MixError::AllZero);
    }
    Ok(MixManifest {
        sources: sources
            .iter()
            .map(|(path, w)| MixSource {
                path: path.as_ref().to_string(),
                weight: w / total,
            })
            .collect(),
        relabel_mode,
    })
}

impl MixManifest {
    pub fn weight_of(&self, path: &str) -> Option<f64> {
        self.sources.iter().find(|s| s.path == path).map(|s| s.weight)
    }

    /// Seeded sampler drawing source indices in proportion to the weights.
    pub fn sampler(&self, seed: u64) -> MixSampler {
        MixSampler {
            index: WeightedIndex::new(self.sources.iter().map(|s| s.weight)).expect("normalized weights"),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

pub struct MixSampler {
    index: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl Iterator for MixSampler {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(self.index.sample(&mut self.rng))
    }
}
