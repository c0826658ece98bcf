//! Instruction templates for the four skills and their reverse grammar.
//!
//! Everything that turns a skill into words goes through this module, so
//! the segmenter's labels and the plan renderer emit identical strings.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GraspApproachClass;
use crate::trajectory::SkillKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReorientDirection {
    ToHorizontal,
    ToUpright,
}

impl ReorientDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReorientDirection::ToHorizontal => "to_horizontal",
            ReorientDirection::ToUpright => "to_upright",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "to_horizontal" => Some(ReorientDirection::ToHorizontal),
            "to_upright" => Some(ReorientDirection::ToUpright),
            _ => None,
        }
    }

    fn phrase(&self) -> &'static str {
        match self {
            ReorientDirection::ToHorizontal => "to be horizontal",
            ReorientDirection::ToUpright => "to be upright",
        }
    }

    pub fn reversed(&self) -> Self {
        match self {
            ReorientDirection::ToHorizontal => ReorientDirection::ToUpright,
            ReorientDirection::ToUpright => ReorientDirection::ToHorizontal,
        }
    }
}

impl fmt::Display for ReorientDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LanguageError {
    #[error("unlabeled grasp mode: {0}")]
    UnlabeledGraspMode(GraspApproachClass),
}

/// Surface form of a grasp approach as it appears in instructions and in
/// the plan language (`top-down`, `side`, `diagonal`). Upward grasps have
/// no surface form.
pub fn approach_surface(class: GraspApproachClass) -> Option<&'static str> {
    match class {
        GraspApproachClass::TopDown => Some("top-down"),
        GraspApproachClass::Side => Some("side"),
        GraspApproachClass::Diagonal => Some("diagonal"),
        GraspApproachClass::Upward => None,
    }
}

pub fn approach_from_surface(s: &str) -> Option<GraspApproachClass> {
    match s {
        "top-down" => Some(GraspApproachClass::TopDown),
        "side" => Some(GraspApproachClass::Side),
        "diagonal" => Some(GraspApproachClass::Diagonal),
        _ => None,
    }
}

/// `grasp the <object> in a <approach> grasp`
pub fn render_grasp(object: &str, class: GraspApproachClass) -> Result<String, LanguageError> {
    let approach = approach_surface(class).ok_or(LanguageError::UnlabeledGraspMode(class))?;
    Ok(format!("grasp the {object} in a {approach} grasp"))
}

/// `reorient the <object> to be horizontal|upright`
pub fn render_reorient(object: &str, direction: ReorientDirection) -> String {
    format!("reorient the {object} {}", direction.phrase())
}

pub fn render_lift(object: &str) -> String {
    format!("hold and lift the {object}")
}

pub fn render_place(object: &str) -> String {
    format!("place the {object}")
}

/// A rendered instruction broken back into its parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderedSkill {
    Grasp { object: String, approach: GraspApproachClass },
    Reorient { object: String, direction: ReorientDirection },
    Lift { object: String },
    Place { object: String },
}

impl RenderedSkill {
    pub fn kind(&self) -> SkillKind {
        match self {
            RenderedSkill::Grasp { .. } => SkillKind::Grasp,
            RenderedSkill::Reorient { .. } => SkillKind::Reorient,
            RenderedSkill::Lift { .. } => SkillKind::Lift,
            RenderedSkill::Place { .. } => SkillKind::Place,
        }
    }

    pub fn object(&self) -> &str {
        match self {
            RenderedSkill::Grasp { object, .. }
            | RenderedSkill::Reorient { object, .. }
            | RenderedSkill::Lift { object }
            | RenderedSkill::Place { object } => object,
        }
    }
}

/// Reverse grammar of the instruction templates. Only byte-exact template
/// output is accepted; the object slot must be non-empty.
pub fn parse_rendered(text: &str) -> Option<RenderedSkill> {
    let nonempty = |s: &str| (!s.is_empty()).then(|| s.to_string());

    if let Some(rest) = text.strip_prefix("grasp the ") {
        let body = rest.strip_suffix(" grasp")?;
        let (object, approach) = body.rsplit_once(" in a ")?;
        return Some(RenderedSkill::Grasp {
            object: nonempty(object)?,
            approach: approach_from_surface(approach)?,
        });
    }
    if let Some(rest) = text.strip_prefix("reorient the ") {
        for direction in [ReorientDirection::ToHorizontal, ReorientDirection::ToUpright] {
            if let Some(object) = rest.strip_suffix(direction.phrase()).and_then(|r| r.strip_suffix(' ')) {
                return Some(RenderedSkill::Reorient {
                    object: nonempty(object)?,
                    direction,
                });
            }
        }
        return None;
    }
    if let Some(object) = text.strip_prefix("hold and lift the ") {
        return Some(RenderedSkill::Lift { object: nonempty(object)? });
    }
    if let Some(object) = text.strip_prefix("place the ") {
        return Some(RenderedSkill::Place { object: nonempty(object)? });
    }
    None
}
