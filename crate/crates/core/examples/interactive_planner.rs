//! A planner that defers to an operator: requests arrive on a channel and
//! the first answer is rejected, so the retry carries validation feedback.
//!
//! ```text
//! cargo run -p steer-core --example interactive_planner
//! ```

use std::thread;
use std::time::Duration;

use steer_core::orchestrator::{propose_plan, InteractivePlanner, PlannerRequest};
use steer_core::sim::SceneState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (planner, inbox) = InteractivePlanner::new(Some(Duration::from_secs(5)));
    let operator = thread::spawn(move || {
        let answers = [r#"lift("apple")"#, r#"grasp("apple", "top-down") lift("apple")"#];
        for answer in answers {
            let Ok(pending) = inbox.recv() else { return };
            println!("operator sees task: {:?}", pending.request.task);
            pending.respond(answer.to_string());
        }
    });
    let scene = SceneState::reset("clutter", 0)?;
    let request = PlannerRequest::new("pick up the apple", &scene, None, 0);
    let proposal = propose_plan(&planner, &request, &scene, 2)?;
    println!("accepted after {} attempts:\n{}", proposal.attempts, proposal.plan.source_text);
    drop(planner);
    operator.join().expect("operator thread");
    Ok(())
}
