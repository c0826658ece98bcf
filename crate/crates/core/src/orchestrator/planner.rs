//! Planners turn a task and a scene summary into a program.
//!
//! Three kinds ship: a fixed task table, an HTTP client for a remote
//! model endpoint, and an interactive planner that hands each request to a
//! human through a channel. [`propose_plan`] wraps any of them with parsing,
//! validation and bounded retries.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dsl::{parse_plan, Plan};
use super::memory::PlannerMemory;
use super::plan::{validate_plan, ValidationReport};
use super::prompt::{scene_summary, system_prompt};
use crate::sim::SceneState;

pub const DEFAULT_RETRIES: usize = 2;
pub const DEFAULT_EXAMPLES: usize = 3;
pub const DEFAULT_TIMEOUT_S: u64 = 30;

/// Separates the task from feedback about a rejected program on retries.
pub const FEEDBACK_SEPARATOR: &str = "\n\nThe previous program was rejected:\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerRequest {
    pub system_prompt: String,
    pub scene_summary: String,
    pub task: String,
    pub examples: Vec<String>,
}

impl PlannerRequest {
    /// Request for `task` on `scene`, with up to `k` remembered programs
    /// that succeeded on the same task.
    pub fn new(task: &str, scene: &SceneState, memory: Option<&PlannerMemory>, k: usize) -> Self {
        Self {
            system_prompt: system_prompt(),
            scene_summary: scene_summary(scene),
            task: task.to_string(),
            examples: memory.map(|m| m.retrieve(task, k)).unwrap_or_default(),
        }
    }

    /// The task without any retry feedback.
    pub fn base_task(&self) -> &str {
        self.task.split(FEEDBACK_SEPARATOR).next().unwrap_or(&self.task)
    }

    fn with_feedback(&self, feedback: &str) -> Self {
        let mut next = self.clone();
        next.task = format!("{}{FEEDBACK_SEPARATOR}{feedback}", self.base_task());
        next
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerResponse {
    pub program: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("planner endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("malformed planner response: {0}")]
    Malformed(String),
    #[error("no program for task {0:?}")]
    UnknownTask(String),
    #[error("planner gave no valid program after {attempts} attempts; last error: {last_error}")]
    RetriesExhausted { attempts: usize, last_error: String },
    #[error("interactive planner closed")]
    Closed,
    #[error("planner configuration: {0}")]
    Config(String),
}

impl PlannerError {
    /// Whether asking again could help.
    fn retryable(&self) -> bool {
        matches!(self, PlannerError::Malformed(_))
    }
}

pub trait Planner: Send + Sync {
    fn name(&self) -> &str;
    fn propose(&self, request: &PlannerRequest) -> Result<PlannerResponse, PlannerError>;
}

/// Fixed task → program table.
#[derive(Debug, Clone, Default)]
pub struct ScriptedPlanner {
    table: BTreeMap<String, String>,
}

impl ScriptedPlanner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, task: &str, program: &str) -> Self {
        self.table.insert(task.to_string(), program.to_string());
        self
    }

    /// Programs for the built-in scenarios.
    pub fn canonical() -> Self {
        Self::new()
            .with(
                "pour from the pink cup",
                "grasp(\"pink cup\", \"side\")\nlift(\"pink cup\")\nreorient(\"pink cup\", \"to_horizontal\")\nreorient(\"pink cup\", \"to_upright\")\nplace(\"pink cup\")\n",
            )
            .with(
                "unstack the cups and set the top cup upright",
                "grasp(\"top cup\", \"side\")\nlift(\"top cup\")\nreorient(\"top cup\", \"to_upright\")\nplace(\"top cup\")\n",
            )
            .with("pick up the flower pot", "grasp(\"flower pot\", \"side\")\nlift(\"flower pot\")\n")
            .with("pick up the kettle", "grasp(\"kettle\", \"top-down\")\nlift(\"kettle\")\n")
            .with("pick up the apple", "grasp(\"apple\", \"top-down\")\nlift(\"apple\")\n")
    }

    pub fn tasks(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }
}

impl Planner for ScriptedPlanner {
    fn name(&self) -> &str {
        "scripted"
    }

    fn propose(&self, request: &PlannerRequest) -> Result<PlannerResponse, PlannerError> {
        let task = request.base_task();
        self.table
            .get(task)
            .map(|p| PlannerResponse { program: p.clone() })
            .ok_or_else(|| PlannerError::UnknownTask(task.to_string()))
    }
}

/// JSON-over-HTTP client: POSTs a [`PlannerRequest`], expects a
/// [`PlannerResponse`].
#[derive(Debug, Clone)]
pub struct RemotePlanner {
    url: String,
    agent: ureq::Agent,
}

impl RemotePlanner {
    pub fn new(url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        Self {
            url: url.to_string(),
            agent,
        }
    }

    /// Endpoint from `STEER_PLANNER_URL`, timeout in seconds from
    /// `STEER_PLANNER_TIMEOUT_S`.
    pub fn from_env() -> Result<Self, PlannerError> {
        let url = std::env::var("STEER_PLANNER_URL")
            .map_err(|_| PlannerError::Config("STEER_PLANNER_URL is not set".into()))?;
        let timeout = match std::env::var("STEER_PLANNER_TIMEOUT_S") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|t| *t > 0.0 && t.is_finite())
                .ok_or_else(|| PlannerError::Config(format!("bad STEER_PLANNER_TIMEOUT_S {s:?}")))?,
            Err(_) => DEFAULT_TIMEOUT_S as f64,
        };
        Ok(Self::new(&url, Duration::from_secs_f64(timeout)))
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl Planner for RemotePlanner {
    fn name(&self) -> &str {
        "remote"
    }

    fn propose(&self, request: &PlannerRequest) -> Result<PlannerResponse, PlannerError> {
        let response = self.agent.post(&self.url).send_json(request).map_err(|e| match e {
            ureq::Error::StatusCode(code) => PlannerError::Malformed(format!("HTTP status {code}")),
            other => PlannerError::Unreachable(other.to_string()),
        })?;
        response
            .into_body()
            .read_json::<PlannerResponse>()
            .map_err(|e| PlannerError::Malformed(e.to_string()))
    }
}

/// A request waiting for a human-written program.
#[derive(Debug)]
pub struct PendingRequest {
    pub request: PlannerRequest,
    reply: mpsc::Sender<String>,
}

impl PendingRequest {
    pub fn respond(self, program: impl Into<String>) {
        // The asking side may have timed out; nothing to do then.
        let _ = self.reply.send(program.into());
    }
}

/// Forwards requests to whoever holds the paired receiver and waits for
/// their program.
#[derive(Debug)]
pub struct InteractivePlanner {
    outbox: mpsc::Sender<PendingRequest>,
    timeout: Option<Duration>,
}

impl InteractivePlanner {
    pub fn new(timeout: Option<Duration>) -> (Self, mpsc::Receiver<PendingRequest>) {
        let (outbox, inbox) = mpsc::channel();
        (Self { outbox, timeout }, inbox)
    }
}

impl Planner for InteractivePlanner {
    fn name(&self) -> &str {
        "interactive"
    }

    fn propose(&self, request: &PlannerRequest) -> Result<PlannerResponse, PlannerError> {
        let (reply, answer) = mpsc::channel();
        self.outbox
            .send(PendingRequest {
                request: request.clone(),
                reply,
            })
            .map_err(|_| PlannerError::Closed)?;
        let program = match self.timeout {
            Some(t) => answer.recv_timeout(t).map_err(|e| match e {
                mpsc::RecvTimeoutError::Timeout => PlannerError::Unreachable("no answer before timeout".into()),
                mpsc::RecvTimeoutError::Disconnected => PlannerError::Closed,
            })?,
            None => answer.recv().map_err(|_| PlannerError::Closed)?,
        };
        Ok(PlannerResponse { program })
    }
}

/// A program that parsed and validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub plan: Plan,
    pub report: ValidationReport,
    pub attempts: usize,
}

/// Asks `planner` for a program, parses and validates it against `scene`,
/// and re-asks up to `retries` more times with the error appended to the
/// task.
pub fn propose_plan(
    planner: &dyn Planner,
    request: &PlannerRequest,
    scene: &SceneState,
    retries: usize,
) -> Result<Proposal, PlannerError> {
    let mut current = request.clone();
    let mut last_error = String::new();
    for attempt in 1..=retries + 1 {
        let feedback = match planner.propose(&current) {
            Err(e) if e.retryable() => e.to_string(),
            Err(e) => return Err(e),
            Ok(response) => match parse_plan(&response.program) {
                Err(e) => e.to_string(),
                Ok(plan) => {
                    let report = validate_plan(&plan, scene);
                    if report.is_ok() {
                        return Ok(Proposal {
                            plan,
                            report,
                            attempts: attempt,
                        });
                    }
                    report.error_text()
                }
            },
        };
        current = current.with_feedback(&feedback);
        last_error = feedback;
    }
    Err(PlannerError::RetriesExhausted {
        attempts: retries + 1,
        last_error,
    })
}
