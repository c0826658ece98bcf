//! Plan validation against a scene and open-loop execution.

use serde::{Deserialize, Serialize};

use super::dsl::Plan;
use crate::sim::{SceneState, SkillOutcome};
use crate::skill::SkillCall;
use crate::trajectory::SkillKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCode {
    /// Reorient, lift or place of an object that is not held at that point.
    OrderViolation,
    /// Grasp while another object is still held.
    GraspWhileHolding,
    UnknownObject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanIssue {
    pub index: usize,
    pub code: IssueCode,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<PlanIssue>,
    pub warnings: Vec<PlanIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    /// All errors on one line each, for planner feedback.
    pub fn error_text(&self) -> String {
        self.errors
            .iter()
            .map(|e| format!("call {}: {}", e.index, e.message))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Checks call ordering by tracking what the gripper holds call by call.
/// Object names the scene does not know produce warnings.
pub fn validate_plan(plan: &Plan, scene: &SceneState) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut held: Option<String> = scene.held_object().map(str::to_string);
    for (index, call) in plan.calls.iter().enumerate() {
        let name = match scene.resolve(call.object()) {
            Some(n) => n.to_string(),
            None => {
                report.warnings.push(PlanIssue {
                    index,
                    code: IssueCode::UnknownObject,
                    message: format!("unknown object {:?}", call.object()),
                });
                call.object().to_string()
            }
        };
        match call.kind() {
            SkillKind::Grasp => {
                if let Some(h) = &held {
                    report.errors.push(PlanIssue {
                        index,
                        code: IssueCode::GraspWhileHolding,
                        message: format!("grasp of {:?} while holding {h:?}", call.object()),
                    });
                }
                held = Some(name);
            }
            kind => {
                if held.as_deref() != Some(name.as_str()) {
                    let message = match &held {
                        None => format!("{kind} of {:?} before any grasp of it", call.object()),
                        Some(h) => format!("{kind} of {:?} while holding {h:?}", call.object()),
                    };
                    report.errors.push(PlanIssue {
                        index,
                        code: IssueCode::OrderViolation,
                        message,
                    });
                }
                if kind == SkillKind::Place {
                    held = None;
                }
            }
        }
    }
    report
}

/// One executed call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub index: usize,
    pub call: SkillCall,
    pub instruction: String,
    pub success: bool,
    pub reason: String,
    /// Absent when the call was rejected before moving the robot.
    pub outcome: Option<SkillOutcome>,
    pub scene: SceneState,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLog {
    pub entries: Vec<LogEntry>,
    /// Index of the failing call, if execution stopped early.
    pub halted_at: Option<usize>,
}

impl ExecutionLog {
    pub fn succeeded(&self) -> bool {
        self.halted_at.is_none()
    }
}

/// Runs one call on `scene` and records the result.
pub fn execute_call(scene: &mut SceneState, index: usize, call: &SkillCall) -> LogEntry {
    let instruction = call.render_language();
    match scene.exec(call) {
        Ok(outcome) => LogEntry {
            index,
            call: call.clone(),
            instruction,
            success: outcome.success,
            reason: outcome.reason.clone(),
            outcome: Some(outcome),
            scene: scene.clone(),
        },
        Err(e) => LogEntry {
            index,
            call: call.clone(),
            instruction,
            success: false,
            reason: e.to_string(),
            outcome: None,
            scene: scene.clone(),
        },
    }
}

/// Executes the calls in order, stopping after the first failure.
pub fn execute_plan(plan: &Plan, scene: &mut SceneState) -> ExecutionLog {
    let mut log = ExecutionLog::default();
    for (index, call) in plan.calls.iter().enumerate() {
        let entry = execute_call(scene, index, call);
        let failed = !entry.success;
        log.entries.push(entry);
        if failed {
            log.halted_at = Some(index);
            break;
        }
    }
    log
}
