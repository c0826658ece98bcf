//! The skill call: one invocation of grasp, reorient, lift or place on a
//! named object, with its "how" modifier.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GraspApproachClass;
use crate::language::{
    approach_from_surface, approach_surface, render_grasp, render_lift, render_place, render_reorient,
    ReorientDirection,
};
use crate::trajectory::SkillKind;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SkillCallWire", into = "SkillCallWire")]
pub enum SkillCall {
    Grasp { object: String, approach: GraspApproachClass },
    Reorient { object: String, direction: ReorientDirection },
    Lift { object: String },
    Place { object: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkillCallError {
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("{name} takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("invalid modifier {value:?} for {name}; expected one of {allowed}")]
    InvalidModifier { name: String, value: String, allowed: String },
    #[error("empty object name")]
    EmptyObject,
}

impl SkillKind {
    pub fn parse(s: &str) -> Option<SkillKind> {
        SkillKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Whether calls of this kind carry a modifier argument.
    pub fn takes_modifier(&self) -> bool {
        matches!(self, SkillKind::Grasp | SkillKind::Reorient)
    }

    pub fn allowed_modifiers(&self) -> &'static [&'static str] {
        match self {
            SkillKind::Grasp => &["top-down", "side", "diagonal"],
            SkillKind::Reorient => &["to_horizontal", "to_upright"],
            SkillKind::Lift | SkillKind::Place => &[],
        }
    }
}

/// Accepted spellings of a reorientation direction beyond the canonical ones.
fn direction_from_text(text: &str) -> Option<ReorientDirection> {
    match text {
        "to_horizontal" | "horizontal" => Some(ReorientDirection::ToHorizontal),
        "to_upright" | "upright" | "vertical" => Some(ReorientDirection::ToUpright),
        _ => None,
    }
}

impl SkillCall {
    /// Builds a call from its function name, object and optional modifier
    /// text, normalizing direction synonyms (`vertical`, `upright`,
    /// `horizontal`).
    pub fn from_parts(name: &str, object: &str, modifier: Option<&str>) -> Result<Self, SkillCallError> {
        let kind = SkillKind::parse(name).ok_or_else(|| SkillCallError::UnknownFunction(name.to_string()))?;
        let expected = if kind.takes_modifier() { 2 } else { 1 };
        let got = 1 + usize::from(modifier.is_some());
        if got != expected {
            return Err(SkillCallError::Arity {
                name: name.to_string(),
                expected,
                got,
            });
        }
        if object.trim().is_empty() {
            return Err(SkillCallError::EmptyObject);
        }
        let object = object.to_string();
        let invalid = |value: &str| SkillCallError::InvalidModifier {
            name: name.to_string(),
            value: value.to_string(),
            allowed: kind.allowed_modifiers().join(", "),
        };
        Ok(match kind {
            SkillKind::Grasp => {
                let m = modifier.unwrap_or_default();
                SkillCall::Grasp {
                    object,
                    approach: approach_from_surface(m).ok_or_else(|| invalid(m))?,
                }
            }
            SkillKind::Reorient => {
                let m = modifier.unwrap_or_default();
                SkillCall::Reorient {
                    object,
                    direction: direction_from_text(m).ok_or_else(|| invalid(m))?,
                }
            }
            SkillKind::Lift => SkillCall::Lift { object },
            SkillKind::Place => SkillCall::Place { object },
        })
    }

    pub fn grasp(object: impl Into<String>, approach: GraspApproachClass) -> Self {
        assert!(approach != GraspApproachClass::Upward, "upward grasps are not callable");
        SkillCall::Grasp {
            object: object.into(),
            approach,
        }
    }

    pub fn reorient(object: impl Into<String>, direction: ReorientDirection) -> Self {
        SkillCall::Reorient {
            object: object.into(),
            direction,
        }
    }

    pub fn lift(object: impl Into<String>) -> Self {
        SkillCall::Lift { object: object.into() }
    }

    pub fn place(object: impl Into<String>) -> Self {
        SkillCall::Place { object: object.into() }
    }

    pub fn kind(&self) -> SkillKind {
        match self {
            SkillCall::Grasp { .. } => SkillKind::Grasp,
            SkillCall::Reorient { .. } => SkillKind::Reorient,
            SkillCall::Lift { .. } => SkillKind::Lift,
            SkillCall::Place { .. } => SkillKind::Place,
        }
    }

    pub fn object(&self) -> &str {
        match self {
            SkillCall::Grasp { object, .. }
            | SkillCall::Reorient { object, .. }
            | SkillCall::Lift { object }
            | SkillCall::Place { object } => object,
        }
    }

    /// Canonical modifier text as written in the plan language.
    pub fn modifier(&self) -> Option<&'static str> {
        match self {
            SkillCall::Grasp { approach, .. } => approach_surface(*approach),
            SkillCall::Reorient { direction, .. } => Some(direction.as_str()),
            SkillCall::Lift { .. } | SkillCall::Place { .. } => None,
        }
    }

    /// Modifier as recorded on relabeled segments (`top_down`, `to_upright`, ...).
    pub fn segment_modifier(&self) -> Option<&'static str> {
        match self {
            SkillCall::Grasp { approach, .. } => Some(approach.as_str()),
            SkillCall::Reorient { direction, .. } => Some(direction.as_str()),
            SkillCall::Lift { .. } | SkillCall::Place { .. } => None,
        }
    }

    /// The instruction the low-level policy was trained on for this call.
    pub fn render_language(&self) -> String {
        match self {
            SkillCall::Grasp { object, approach } => {
                render_grasp(object, *approach).expect("grasp calls never carry the upward class")
            }
            SkillCall::Reorient { object, direction } => render_reorient(object, *direction),
            SkillCall::Lift { object } => render_lift(object),
            SkillCall::Place { object } => render_place(object),
        }
    }

    /// The call in plan-language syntax, e.g. `grasp("pink cup", "side")`.
    pub fn to_dsl(&self) -> String {
        let quote = |s: &str| {
            let mut out = String::with_capacity(s.len() + 2);
            out.push('"');
            for c in s.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('"');
            out
        };
        match self.modifier() {
            Some(m) => format!("{}({}, {})", self.kind(), quote(self.object()), quote(m)),
            None => format!("{}({})", self.kind(), quote(self.object())),
        }
    }
}

impl fmt::Display for SkillCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}

/// JSON form: `{"name": "grasp", "object": "cup", "modifier": "side"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkillCallWire {
    pub name: String,
    pub object: String,
    #[serde(default)]
    pub modifier: Option<String>,
}

impl TryFrom<SkillCallWire> for SkillCall {
    type Error = SkillCallError;

    fn try_from(w: SkillCallWire) -> Result<Self, Self::Error> {
        SkillCall::from_parts(&w.name, &w.object, w.modifier.as_deref())
    }
}

impl From<SkillCall> for SkillCallWire {
    fn from(c: SkillCall) -> Self {
        SkillCallWire {
            name: c.kind().as_str().to_string(),
            object: c.object().to_string(),
            modifier: c.modifier().map(str::to_string),
        }
    }
}
