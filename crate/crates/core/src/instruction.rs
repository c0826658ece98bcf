//! Parser for the original episode-level instructions.
//!
//! Four templates make up the grammar: `pick <object>`,
//! `move <object1> near <object2>`, `knock <object>` and
//! `place <object> upright`. Matching is case-insensitive and ignores
//! surrounding whitespace. `knock <object> over` is read as `knock <object>`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionTemplate {
    Pick,
    MoveNear,
    Knock,
    PlaceUpright,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedInstruction {
    pub template: InstructionTemplate,
    /// The manipulated object; for `move_near` this is `<object1>`.
    pub object_slot: String,
    pub secondary_object_slot: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstructionError {
    #[error("unknown template: {0:?}")]
    UnknownTemplate(String),
    #[error("empty slot in {0:?}")]
    EmptySlot(String),
}

/// How a template's text surrounds its slots.
enum Shape {
    /// `<keyword> <object>`
    Prefix,
    /// `<keyword> <object> [<suffix>]`
    OptionalSuffix(&'static str),
    /// `<keyword> <object> <suffix>`
    Wrapped(&'static str),
    /// `<keyword> <object1> <separator> <object2>`, split at the last separator.
    Binary(&'static str),
}

const TEMPLATES: &[(InstructionTemplate, &str, Shape)] = &[
    (InstructionTemplate::Pick, "pick", Shape::Prefix),
    (InstructionTemplate::MoveNear, "move", Shape::Binary("near")),
    (InstructionTemplate::Knock, "knock", Shape::OptionalSuffix("over")),
    (InstructionTemplate::PlaceUpright, "place", Shape::Wrapped("upright")),
];

fn strip_keyword<'a>(text: &'a str, keyword: &str) -> Option<&'a str> {
    let rest = text.strip_prefix(keyword)?;
    if rest.is_empty() {
        Some(rest)
    } else if rest.starts_with(char::is_whitespace) {
        Some(rest.trim_start())
    } else {
        None
    }
}

fn slot(text: &str, whole: &str) -> Result<String, InstructionError> {
    let s = text.trim();
    if s.is_empty() {
        Err(InstructionError::EmptySlot(whole.to_string()))
    } else {
        Ok(s.to_string())
    }
}

pub fn parse_instruction(text: &str) -> Result<ParsedInstruction, InstructionError> {
    let normalized = text.trim().to_lowercase();
    let unknown = || InstructionError::UnknownTemplate(text.to_string());

    // Longest keyword first, so a future template sharing a prefix wins when
    // it is the more specific match.
    let mut candidates: Vec<_> = TEMPLATES.iter().collect();
    candidates.sort_by_key(|(_, keyword, _)| std::cmp::Reverse(keyword.len()));

    for (template, keyword, shape) in candidates {
        let Some(rest) = strip_keyword(&normalized, keyword) else {
            continue;
        };
        let parsed = match shape {
            Shape::Prefix => ParsedInstruction {
                template: *template,
                object_slot: slot(rest, text)?,
                secondary_object_slot: None,
            },
            Shape::OptionalSuffix(suffix) => {
                let body = match rest.strip_suffix(suffix) {
                    Some(b) if b.ends_with(char::is_whitespace) && !b.trim().is_empty() => b,
                    _ => rest,
                };
                ParsedInstruction {
                    template: *template,
                    object_slot: slot(body, text)?,
                    secondary_object_slot: None,
                }
            }
            Shape::Wrapped(suffix) => {
                let body = if rest == *suffix {
                    ""
                } else {
                    match rest.strip_suffix(suffix) {
                        Some(b) if b.ends_with(char::is_whitespace) => b,
                        _ => return Err(unknown()),
                    }
                };
                ParsedInstruction {
                    template: *template,
                    object_slot: slot(body, text)?,
                    secondary_object_slot: None,
                }
            }
            Shape::Binary(separator) => {
                let (first, second) = split_last_word(rest, separator).ok_or_else(unknown)?;
                ParsedInstruction {
                    template: *template,
                    object_slot: slot(first, text)?,
                    secondary_object_slot: Some(slot(second, text)?),
                }
            }
        };
        return Ok(parsed);
    }
    Err(unknown())
}

/// Splits `text` around the last whitespace-delimited occurrence of `word`.
fn split_last_word<'a>(text: &'a str, word: &str) -> Option<(&'a str, &'a str)> {
    let bytes = text.as_bytes();
    let mut search_end = text.len();
    while let Some(pos) = text[..search_end].rfind(word) {
        let end = pos + word.len();
        let left_ok = pos == 0 || bytes[pos - 1].is_ascii_whitespace();
        let right_ok = end == text.len() || bytes[end].is_ascii_whitespace();
        if left_ok && right_ok {
            return Some((&text[..pos], &text[end..]));
        }
        if pos == 0 {
            break;
        }
        search_end = pos;
    }
    None
}
