//! Sessions: one simulated scene each, its execution history, and the
//! event fan-out for streaming subscribers.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use steer_core::orchestrator::{execute_call, LogEntry};
use steer_core::sim::{SceneState, SimError};
use steer_core::skill::SkillCall;
use steer_core::trajectory::TimeStep;
use tokio::sync::{broadcast, Mutex};

/// Events buffered per subscriber before it counts as lagging.
pub const STREAM_CAPACITY: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallSource {
    Skill,
    Plan,
}

/// One executed call in a session's append-only history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub index: usize,
    pub source: CallSource,
    pub entry: LogEntry,
}

/// Result of a call as carried on the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSummary {
    pub history_index: usize,
    pub call: SkillCall,
    pub instruction: String,
    pub success: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StreamEvent {
    /// First frame on every connection: the scene as of `seq`.
    Snapshot { seq: u64, scene: SceneState },
    /// One recorded time step. The last step of a call carries the
    /// resulting scene and the call's outcome.
    Step {
        seq: u64,
        step: TimeStep,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        scene: Option<SceneState>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        outcome: Option<OutcomeSummary>,
    },
}

/// First line of a persisted session file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub scenario: String,
    pub seed: u64,
    pub created_at: u64,
}

pub struct SessionInner {
    pub scene: SceneState,
    pub history: Vec<HistoryEntry>,
    /// Program text of the most recent executed plan.
    pub last_program: Option<String>,
    /// Sequence number of the last emitted step event.
    pub seq: u64,
    file: Option<File>,
}

pub struct Session {
    pub header: SessionHeader,
    pub inner: Mutex<SessionInner>,
    events: broadcast::Sender<StreamEvent>,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn json_line(value: &impl Serialize) -> Vec<u8> {
    let mut line = serde_json::to_vec(value).expect("serializable");
    line.push(b'\n');
    line
}

impl Session {
    pub fn create(
        session_id: String,
        scenario: &str,
        seed: u64,
        persist_dir: Option<&Path>,
    ) -> Result<Session, SessionError> {
        let scene = SceneState::reset(scenario, seed)?;
        let header = SessionHeader {
            session_id,
            scenario: scenario.to_string(),
            seed,
            created_at: now_ms(),
        };
        let file = match persist_dir {
            Some(dir) => {
                let mut f = OpenOptions::new()
                    .create_new(true)
                    .write(true)
                    .open(session_file(dir, &header.session_id))?;
                f.write_all(&json_line(&header))?;
                Some(f)
            }
            None => None,
        };
        let (events, _) = broadcast::channel(STREAM_CAPACITY);
        Ok(Session {
            header,
            inner: Mutex::new(SessionInner {
                scene,
                history: Vec::new(),
                last_program: None,
                seq: 0,
                file,
            }),
            events,
        })
    }

    pub fn subscribe(&self) -> broadcast::Receiver<StreamEvent> {
        self.events.subscribe()
    }

    /// Executes one call with the session lock held by the caller. Calls
    /// the simulator refuses (nothing held, unknown object, ...) change
    /// nothing and come back as `Ok(Err(entry))`; everything else is
    /// appended to the history and streamed.
    pub fn run_call(
        &self,
        inner: &mut SessionInner,
        call: &SkillCall,
        source: CallSource,
    ) -> io::Result<Result<HistoryEntry, LogEntry>> {
        let entry = execute_call(&mut inner.scene, inner.history.len(), call);
        if entry.outcome.is_none() {
            return Ok(Err(entry));
        }
        let record = HistoryEntry {
            index: inner.history.len(),
            source,
            entry,
        };
        if let Some(f) = inner.file.as_mut() {
            f.write_all(&json_line(&record))?;
        }
        let steps = record
            .entry
            .outcome
            .as_ref()
            .map(|o| o.trajectory.as_slice())
            .unwrap_or_default();
        for (i, step) in steps.iter().enumerate() {
            inner.seq += 1;
            let last = i + 1 == steps.len();
            // No subscribers is not an error.
            let _ = self.events.send(StreamEvent::Step {
                seq: inner.seq,
                step: step.clone(),
                scene: last.then(|| record.entry.scene.clone()),
                outcome: last.then(|| OutcomeSummary {
                    history_index: record.index,
                    call: record.entry.call.clone(),
                    instruction: record.entry.instruction.clone(),
                    success: record.entry.success,
                    reason: record.entry.reason.clone(),
                }),
            });
        }
        inner.history.push(record.clone());
        Ok(Ok(record))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad session file: {0}")]
    Format(String),
}

pub fn session_file(dir: &Path, session_id: &str) -> PathBuf {
    dir.join(format!("{session_id}.jsonl"))
}

/// A persisted session: its header and executed calls.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedSession {
    pub header: SessionHeader,
    pub history: Vec<HistoryEntry>,
}

pub fn read_session_file(path: &Path) -> Result<RecordedSession, SessionError> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines.next().ok_or_else(|| SessionError::Format("empty file".into()))??;
    let header: SessionHeader = serde_json::from_str(&first).map_err(|e| SessionError::Format(e.to_string()))?;
    let mut history = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        history.push(serde_json::from_str(&line).map_err(|e| SessionError::Format(e.to_string()))?);
    }
    Ok(RecordedSession { header, history })
}

/// Re-executes recorded calls on a fresh scene for the same scenario and
/// seed, returning the final scene.
pub fn replay(scenario: &str, seed: u64, calls: &[SkillCall]) -> Result<SceneState, SimError> {
    let mut scene = SceneState::reset(scenario, seed)?;
    for (i, call) in calls.iter().enumerate() {
        execute_call(&mut scene, i, call);
    }
    Ok(scene)
}

impl RecordedSession {
    pub fn calls(&self) -> Vec<SkillCall> {
        self.history.iter().map(|h| h.entry.call.clone()).collect()
    }

    pub fn replay(&self) -> Result<SceneState, SimError> {
        replay(&self.header.scenario, self.header.seed, &self.calls())
    }
}
