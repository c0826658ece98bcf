//! System prompt and textual scene summaries for planners.

use std::fmt::Write;

use crate::geometry::GraspApproachClass;
use crate::language::ReorientDirection;
use crate::sim::{OrientationClass, SceneState};
use crate::skill::SkillCall;
use crate::trajectory::SkillKind;

pub const SYSTEM_PROMPT_TEMPLATE: &str = include_str!("../../data/system_prompt.md");

const PLACEHOLDER: &str = "<object>";

/// One entry per skill: signature, allowed modifiers, and the instruction
/// each call runs, exactly as rendered for execution.
pub fn skill_api_doc() -> String {
    let mut out = String::new();
    for kind in SkillKind::ALL {
        let (signature, examples): (String, Vec<SkillCall>) = match kind {
            SkillKind::Grasp => (
                "grasp(object, approach)".into(),
                [GraspApproachClass::TopDown, GraspApproachClass::Side, GraspApproachClass::Diagonal]
                    .into_iter()
                    .map(|c| SkillCall::grasp(PLACEHOLDER, c))
                    .collect(),
            ),
            SkillKind::Reorient => (
                "reorient(object, direction)".into(),
                [ReorientDirection::ToHorizontal, ReorientDirection::ToUpright]
                    .into_iter()
                    .map(|d| SkillCall::reorient(PLACEHOLDER, d))
                    .collect(),
            ),
            SkillKind::Lift => ("lift(object)".into(), vec![SkillCall::lift(PLACEHOLDER)]),
            SkillKind::Place => ("place(object)".into(), vec![SkillCall::place(PLACEHOLDER)]),
        };
        let _ = writeln!(out, "- `{signature}`");
        if !kind.allowed_modifiers().is_empty() {
            let allowed: Vec<String> = kind.allowed_modifiers().iter().map(|m| format!("\"{m}\"")).collect();
            let _ = writeln!(out, "  - allowed values: {}", allowed.join(", "));
        }
        for call in examples {
            let _ = writeln!(out, "  - `{}` runs \"{}\"", call.to_dsl(), call.render_language());
        }
    }
    out.trim_end().to_string()
}

pub fn system_prompt() -> String {
    SYSTEM_PROMPT_TEMPLATE.replace("{{skill_api}}", &skill_api_doc())
}

/// Objects with their pose class and support, what is held, and the
/// scenario's constraint hints.
pub fn scene_summary(scene: &SceneState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "objects:");
    for (name, o) in &scene.objects {
        let pose = match o.orientation_class {
            OrientationClass::Upright => "upright",
            OrientationClass::Horizontal => "lying on its side",
        };
        let support = if o.held {
            "held by the gripper".to_string()
        } else if (o.position.z - scene.table_height).abs() < 1e-9 {
            "on the table".to_string()
        } else {
            let below = scene
                .objects
                .iter()
                .filter(|(n, b)| *n != name && b.position.z < o.position.z)
                .min_by(|a, b| {
                    let da = (a.1.position.xy() - o.position.xy()).norm();
                    let db = (b.1.position.xy() - o.position.xy()).norm();
                    da.total_cmp(&db)
                });
            match below {
                Some((n, b)) if (b.position.xy() - o.position.xy()).norm() < 0.05 => format!("resting on the {n}"),
                _ => format!("{:.2} m above the table", o.position.z - scene.table_height),
            }
        };
        let _ = write!(out, "- {name}: {pose}, {support}");
        if !o.aliases.is_empty() {
            let _ = write!(out, " (also called: {})", o.aliases.join(", "));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "holding: {}", scene.held_object().unwrap_or("nothing"));
    let hints: Vec<&str> = scene.rules.iter().map(|r| r.hint.as_str()).filter(|h| !h.is_empty()).collect();
    if !hints.is_empty() {
        let _ = writeln!(out, "constraints:");
        for h in hints {
            let _ = writeln!(out, "- {h}");
        }
    }
    out
}
