//! The plan language.
//!
//! ```text
//! program := stmt+
//! stmt    := name "(" string ["," string] ")" [";"]
//! string  := '"' (char | '\"' | '\\')* '"'
//! ```
//!
//! `#` starts a comment running to the end of the line. Whitespace,
//! including newlines, is insignificant between tokens.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::skill::{SkillCall, SkillCallError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorCode {
    Syntax,
    UnknownFunction,
    Arity,
    InvalidModifier,
}

impl ParseErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParseErrorCode::Syntax => "syntax",
            ParseErrorCode::UnknownFunction => "unknown_function",
            ParseErrorCode::Arity => "arity",
            ParseErrorCode::InvalidModifier => "invalid_modifier",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parse failure located at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{code} error at {line}:{column}: {message}")]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

/// A parsed program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub calls: Vec<SkillCall>,
    pub source_text: String,
}

impl Plan {
    /// Plan whose source text is the canonical rendering of `calls`.
    pub fn from_calls(calls: Vec<SkillCall>) -> Plan {
        let source_text = render_program(&calls);
        Plan { calls, source_text }
    }

    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }
}

/// One call per line in canonical form.
pub fn render_program(calls: &[SkillCall]) -> String {
    let mut out = String::new();
    for call in calls {
        out.push_str(&call.to_dsl());
        out.push('\n');
    }
    out
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_trivia();
        self.chars.peek().copied()
    }

    fn position(&self) -> (usize, usize) {
        (self.line, self.column)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            code: ParseErrorCode::Syntax,
            message: message.into(),
            line: self.line,
            column: self.column,
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected {want:?}, found {c:?}"))),
            None => Err(self.error(format!("expected {want:?}, found end of program"))),
        }
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        let mut name = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            Some(c) => return Err(self.error(format!("expected a function name, found {c:?}"))),
            None => return Err(self.error("expected a function name")),
        }
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(name)
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some('"') => {
                self.bump();
            }
            Some(c) => return Err(self.error(format!("expected a quoted string, found {c:?}"))),
            None => return Err(self.error("expected a quoted string, found end of program")),
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => out.push(c),
                    Some(c) => return Err(self.error(format!("unknown escape \\{c}"))),
                    None => return Err(self.error("unterminated string")),
                },
                Some('\n') | None => return Err(self.error("unterminated string")),
                Some(c) => out.push(c),
            }
        }
    }
}

fn call_error(e: SkillCallError, line: usize, column: usize) -> ParseError {
    let code = match e {
        SkillCallError::UnknownFunction(_) => ParseErrorCode::UnknownFunction,
        SkillCallError::Arity { .. } => ParseErrorCode::Arity,
        SkillCallError::InvalidModifier { .. } => ParseErrorCode::InvalidModifier,
        SkillCallError::EmptyObject => ParseErrorCode::Syntax,
    };
    ParseError {
        code,
        message: e.to_string(),
        line,
        column,
    }
}

pub fn parse_plan(text: &str) -> Result<Plan, ParseError> {
    let mut lx = Lexer::new(text);
    let mut calls = Vec::new();
    while lx.peek().is_some() {
        let (line, column) = lx.position();
        let name = lx.identifier()?;
        lx.expect('(')?;
        let mut args = Vec::new();
        if lx.peek() != Some(')') {
            args.push(lx.string()?);
            while lx.peek() == Some(',') {
                lx.bump();
                args.push(lx.string()?);
            }
        }
        lx.expect(')')?;
        if lx.peek() == Some(';') {
            lx.bump();
        }
        let call = match args.as_slice() {
            [object] => SkillCall::from_parts(&name, object, None),
            [object, modifier] => SkillCall::from_parts(&name, object, Some(modifier)),
            _ => match crate::trajectory::SkillKind::parse(&name) {
                None => Err(SkillCallError::UnknownFunction(name.clone())),
                Some(kind) => Err(SkillCallError::Arity {
                    name: name.clone(),
                    expected: if kind.takes_modifier() { 2 } else { 1 },
                    got: args.len(),
                }),
            },
        }
        .map_err(|e| call_error(e, line, column))?;
        calls.push(call);
    }
    if calls.is_empty() {
        let (line, column) = lx.position();
        return Err(ParseError {
            code: ParseErrorCode::Syntax,
            message: "empty program".into(),
            line,
            column,
        });
    }
    Ok(Plan {
        calls,
        source_text: text.to_string(),
    })
}
