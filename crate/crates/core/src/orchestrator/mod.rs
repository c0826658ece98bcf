//! Plans over the skill API: parsing, validation, execution against a
//! scene, planners, and the memory of programs that worked.

pub mod dsl;
pub mod memory;
pub mod plan;
pub mod planner;
pub mod prompt;

pub use dsl::{parse_plan, render_program, ParseError, ParseErrorCode, Plan};
pub use memory::{PlannerMemory, PlannerMemoryEntry};
pub use plan::{execute_call, execute_plan, validate_plan, ExecutionLog, IssueCode, LogEntry, PlanIssue, ValidationReport};
pub use planner::{
    propose_plan, InteractivePlanner, PendingRequest, Planner, PlannerError, PlannerRequest, PlannerResponse,
    Proposal, RemotePlanner, ScriptedPlanner,
};
pub use prompt::{scene_summary, skill_api_doc, system_prompt};
