//! Ask a planner for a program, with memory of past successes.
//!
//! ```text
//! cargo run -p steer-core --example scripted_planner
//! ```

use steer_core::orchestrator::planner::{DEFAULT_EXAMPLES, DEFAULT_RETRIES};
use steer_core::orchestrator::{execute_plan, propose_plan, PlannerMemory, PlannerRequest, ScriptedPlanner};
use steer_core::sim::SceneState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let planner = ScriptedPlanner::canonical();
    let memory = PlannerMemory::new();
    let task = "unstack the cups and set the top cup upright";

    let mut scene = SceneState::reset("stacked", 0)?;
    let request = PlannerRequest::new(task, &scene, Some(&memory), DEFAULT_EXAMPLES);
    println!("scene summary:\n{}", request.scene_summary);
    let proposal = propose_plan(&planner, &request, &scene, DEFAULT_RETRIES)?;
    println!("program after {} attempt(s):\n{}", proposal.attempts, proposal.plan.source_text);

    let log = execute_plan(&proposal.plan, &mut scene);
    memory.record(task, &proposal.plan.source_text, log.succeeded())?;
    let next = PlannerRequest::new(task, &scene, Some(&memory), DEFAULT_EXAMPLES);
    println!("succeeded: {}; examples in the next request: {}", log.succeeded(), next.examples.len());
    Ok(())
}
