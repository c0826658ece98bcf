//! Parse, validate and render plan programs.
//!
//! ```text
//! cargo run -p steer-core --example parse_plan -- 'grasp("apple", "top-down") lift("apple")'
//! ```

use steer_core::orchestrator::{parse_plan, validate_plan};
use steer_core::sim::SceneState;
use steer_core::skill::SkillCall;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let programs: Vec<String> = match std::env::args().nth(1) {
        Some(p) => vec![p],
        None => vec![
            r#"grasp("apple", "top-down") lift("apple")"#.into(),
            r#"lift("apple")"#.into(),
            "grasp(\"apple\", \"sideways\")".into(),
            "grasp(\"apple\"".into(),
        ],
    };
    let scene = SceneState::reset("clutter", 0)?;
    for program in programs {
        println!("{program}");
        match parse_plan(&program) {
            Err(e) => println!("  parse error {:?} at {}:{}: {}", e.code, e.line, e.column, e.message),
            Ok(plan) => {
                for call in &plan.calls {
                    println!("  {:<36} {}", call.to_dsl(), call.render_language());
                }
                let report = validate_plan(&plan, &scene);
                if !report.is_ok() {
                    println!("  invalid: {}", report.error_text());
                }
                let calls: Vec<&SkillCall> = plan.calls.iter().collect();
                println!("  json: {}", serde_json::to_string(&calls)?);
            }
        }
    }
    Ok(())
}
