//! Demonstration data model and the line-delimited JSON wire formats for
//! episode logs and relabeled segments.

use std::fmt;
use std::io::{self, BufRead, Write};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Quat;

/// Quaternions whose norm is within this distance of 1 are renormalized on
/// ingestion; anything further out is rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-3;

/// Norm deviation treated as rounding error rather than drift.
const UNIT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    #[serde(rename = "t")]
    pub index: usize,
    #[serde(rename = "ee_pos")]
    pub ee_position: Vector3<f64>,
    #[serde(rename = "wrist_quat")]
    pub wrist_orientation: Quat,
    #[serde(rename = "gripper")]
    pub gripper_aperture: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub episode_id: String,
    pub instruction: String,
    pub steps: Vec<TimeStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_segments: Option<Vec<SkillSegment>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillKind {
    Grasp,
    Reorient,
    Lift,
    Place,
}

impl SkillKind {
    pub const ALL: [SkillKind; 4] = [
        SkillKind::Grasp,
        SkillKind::Reorient,
        SkillKind::Lift,
        SkillKind::Place,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SkillKind::Grasp => "grasp",
            SkillKind::Reorient => "reorient",
            SkillKind::Lift => "lift",
            SkillKind::Place => "place",
        }
    }
}

impl fmt::Display for SkillKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A relabeled sub-trajectory. `start_index..=end_index` is inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillSegment {
    pub episode_id: String,
    #[serde(rename = "start")]
    pub start_index: usize,
    #[serde(rename = "end")]
    pub end_index: usize,
    pub kind: SkillKind,
    #[serde(rename = "object")]
    pub object_slot: String,
    pub modifier: Option<String>,
    #[serde(rename = "instruction")]
    pub rendered_instruction: String,
}

impl SkillSegment {
    pub fn label(&self) -> (SkillKind, Option<&str>) {
        (self.kind, self.modifier.as_deref())
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: io::Error,
    },
}

impl RecordError {
    pub fn line(&self) -> usize {
        match self {
            RecordError::Invalid { line, .. } | RecordError::Io { line, .. } => *line,
        }
    }
}

impl Episode {
    /// Checks the episode and step invariants, renormalizing quaternions
    /// that are within [`RENORMALIZE_TOLERANCE`] of unit length.
    pub fn validate(mut self) -> Result<Episode, String> {
        if self.steps.len() < 2 {
            return Err(format!("episode has {} steps, need at least 2", self.steps.len()));
        }
        for (i, step) in self.steps.iter_mut().enumerate() {
            if step.index != i {
                return Err(format!("step index {} at position {i}, expected contiguous", step.index));
            }
            if !step.ee_position.iter().all(|c| c.is_finite()) {
                return Err(format!("step {i}: non-finite position"));
            }
            let a = step.gripper_aperture;
            if !(0.0..=1.0).contains(&a) {
                return Err(format!("step {i}: aperture out of range ({a})"));
            }
            let norm = step.wrist_orientation.norm();
            if !((norm - 1.0).abs() <= RENORMALIZE_TOLERANCE) {
                return Err(format!("step {i}: degenerate orientation (norm {norm})"));
            }
            // Already-unit quaternions keep their exact bits so that
            // write-then-read is the identity.
            if (norm - 1.0).abs() > UNIT_EPSILON {
                step.wrist_orientation = step.wrist_orientation.normalized();
            }
        }
        if let Some(segments) = &self.ground_truth_segments {
            check_segments(segments, self.steps.len())?;
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Bounds, ordering and non-overlap of one episode's segments.
pub fn check_segments(segments: &[SkillSegment], episode_len: usize) -> Result<(), String> {
    let mut next_free = 0usize;
    for (i, s) in segments.iter().enumerate() {
        if s.start_index > s.end_index || s.end_index >= episode_len {
            return Err(format!(
                "segment {i} span [{}, {}] outside episode of length {episode_len}",
                s.start_index, s.end_index
            ));
        }
        if s.start_index < next_free {
            return Err(format!("segment {i} overlaps or precedes its predecessor"));
        }
        next_free = s.end_index + 1;
    }
    Ok(())
}

/// Parses one episode line; the error carries no line number.
pub fn parse_episode_line(line: &str) -> Result<Episode, String> {
    let episode: Episode = serde_json::from_str(line).map_err(|e| format!("malformed record: {e}"))?;
    episode.validate()
}

/// Streaming episode reader. Blank lines are skipped; line numbers are
/// 1-based.
pub struct EpisodeReader<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> EpisodeReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for EpisodeReader<R> {
    type Item = Result<Episode, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(source) => {
                    return Some(Err(RecordError::Io {
                        line: self.line,
                        source,
                    }))
                }
            }
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            return Some(parse_episode_line(text).map_err(|reason| RecordError::Invalid {
                line: self.line,
                reason,
            }));
        }
    }
}

pub fn read_episodes<R: BufRead>(source: R) -> EpisodeReader<R> {
    EpisodeReader::new(source)
}

pub fn write_episode<W: Write>(episode: &Episode, sink: &mut W) -> io::Result<()> {
    serde_json::to_writer(&mut *sink, episode)?;
    sink.write_all(b"\n")
}

pub fn write_segments<W: Write>(segments: &[SkillSegment], sink: &mut W) -> io::Result<()> {
    for segment in segments {
        serde_json::to_writer(&mut *sink, segment)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_segment_line(line: &str) -> Result<SkillSegment, String> {
    serde_json::from_str(line).map_err(|e| format!("malformed segment record: {e}"))
}

pub fn read_segments<R: BufRead>(source: R) -> impl Iterator<Item = Result<SkillSegment, RecordError>> {
    source
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line_no = i + 1;
            match line {
                Err(source) => Some(Err(RecordError::Io { line: line_no, source })),
                Ok(text) if text.trim().is_empty() => None,
                Ok(text) => Some(parse_segment_line(text.trim()).map_err(|reason| {
                    RecordError::Invalid {
                        line: line_no,
                        reason,
                    }
                })),
            }
        })
}
