//! Execute the pour plan in the single-cup scene and trace the cup.
//!
//! ```text
//! cargo run -p steer-core --example simulate_pour
//! ```

use steer_core::orchestrator::{execute_plan, parse_plan, validate_plan};
use steer_core::sim::SceneState;

const POUR: &str = r#"
grasp("pink cup", "side")
lift("pink cup")
reorient("pink cup", "to_horizontal")
reorient("pink cup", "to_upright")
place("pink cup")
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut scene = SceneState::reset("single_cup", 0)?;
    let plan = parse_plan(POUR)?;
    let report = validate_plan(&plan, &scene);
    println!("validation: {} errors, {} warnings", report.errors.len(), report.warnings.len());
    let log = execute_plan(&plan, &mut scene);
    for e in &log.entries {
        let cup = &e.scene.objects["pink cup"];
        let steps = e.outcome.as_ref().map_or(0, |o| o.trajectory.len());
        println!(
            "{:<40} success={} steps={steps:<3} cup {:?} at ({:.3}, {:.3}, {:.3})",
            e.instruction, e.success, cup.orientation_class, cup.position.x, cup.position.y, cup.position.z
        );
    }
    println!("on table: {}", scene.is_on_table("pink cup"));

    let mut plant = SceneState::reset("potted_plant", 0)?;
    let log = execute_plan(&parse_plan(r#"grasp("flower pot", "top-down") lift("flower pot")"#)?, &mut plant);
    println!("potted plant, top-down: halted at {:?}: {}", log.halted_at, log.entries[0].reason);
    Ok(())
}
