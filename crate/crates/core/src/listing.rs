//! Textual disassembly listings.
//!
//! A listing is a UTF-8 text file modeled on IDA's `proc`/`endp` layout:
//!
//! ```text
//! ; comment
//! .386
//! start proc near
//!         mov     eax, 0
//! loc_1:
//!         rep movsb
//!         ret
//! start endp
//! ```
//!
//! Every instruction line between a `<name> proc` and the matching
//! `<name> endp` belongs to that subroutine. Comments, blank lines,
//! assembler directives and label lines carry no opcode and are skipped.
//! Labels are kept on the subroutine so that a listing can be written back
//! out with its branch targets intact.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Instruction prefixes that fold into the following mnemonic (`rep movsb`
/// becomes the single opcode `rep.movsb`).
const PREFIXES: &[&str] = &["rep", "repe", "repz", "repne", "repnz", "lock"];

/// Leading keywords that mark an assembler directive.
const DIRECTIVES: &[&str] = &[
    "assume",
    "public",
    "extrn",
    "extern",
    "end",
    "include",
    "includelib",
    "align",
    "org",
    "title",
    "option",
    "model",
    "db",
    "dw",
    "dd",
    "dq",
    "dt",
];

/// Second-position keywords that mark a named directive (`_text segment`,
/// `var dd 0`, `size equ 4`).
const NAMED_DIRECTIVES: &[&str] = &[
    "segment", "ends", "struc", "equ", "=", "label", "db", "dw", "dd", "dq", "dt",
];

/// One decoded assembly line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub mnemonic: String,
    pub operands: Vec<String>,
    pub line_no: usize,
}

impl Instruction {
    /// Builds an instruction with a canonicalized mnemonic.
    pub fn new(mnemonic: &str, operands: &[&str], line_no: usize) -> Self {
        Instruction {
            mnemonic: mnemonic.to_ascii_lowercase(),
            operands: operands.iter().map(|s| s.to_string()).collect(),
            line_no,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mnemonic)?;
        if !self.operands.is_empty() {
            write!(f, " {}", self.operands.join(", "))?;
        }
        Ok(())
    }
}

/// A label line inside a subroutine. `position` is the index of the
/// instruction it precedes (equal to the instruction count for a trailing
/// label).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subroutine {
    pub name: String,
    pub instructions: Vec<Instruction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<Label>,
}

impl Subroutine {
    pub fn new(name: impl Into<String>, instructions: Vec<Instruction>) -> Self {
        Subroutine {
            name: name.into(),
            instructions,
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub id: String,
    pub subroutines: Vec<Subroutine>,
}

impl Program {
    pub fn instruction_count(&self) -> usize {
        self.subroutines.iter().map(Subroutine::len).sum()
    }

    pub fn subroutine(&self, name: &str) -> Option<&Subroutine> {
        self.subroutines.iter().find(|s| s.name == name)
    }

    /// Renders the program in the listing format accepted by
    /// [`parse_listing`].
    pub fn to_listing(&self) -> String {
        let mut out = String::new();
        for (i, sub) in self.subroutines.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&sub.name);
            out.push_str(" proc\n");
            let mut labels = sub.labels.iter().peekable();
            for (pos, ins) in sub.instructions.iter().enumerate() {
                while let Some(label) = labels.next_if(|l| l.position <= pos) {
                    out.push_str(&label.name);
                    out.push_str(":\n");
                }
                out.push_str("        ");
                out.push_str(&ins.to_string());
                out.push('\n');
            }
            for label in labels {
                out.push_str(&label.name);
                out.push_str(":\n");
            }
            out.push_str(&sub.name);
            out.push_str(" endp\n");
        }
        out
    }

    /// Re-parses the rendered listing so that line numbers match the text
    /// that [`Program::to_listing`] produces.
    pub fn renumbered(&self) -> Result<Program, ListingError> {
        parse_listing_with(&self.to_listing(), &self.id, ParseOptions::lenient())
    }
}

/// How a `proc`/`endp` pair with no instructions between them is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyBodyPolicy {
    #[default]
    Reject,
    Allow,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub empty_body: EmptyBodyPolicy,
}

impl ParseOptions {
    pub fn lenient() -> Self {
        ParseOptions {
            empty_body: EmptyBodyPolicy::Allow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ListingError {
    #[error("line {line}: procedure `{name}` opened here is never closed")]
    UnterminatedProc { name: String, line: usize },
    #[error("line {line}: `{name} endp` without an open procedure")]
    EndpWithoutProc { name: String, line: usize },
    #[error("line {line}: `{found} endp` closes procedure `{expected}`")]
    MismatchedEndp {
        expected: String,
        found: String,
        line: usize,
    },
    #[error("line {line}: procedure `{name}` is already defined")]
    DuplicateProc { name: String, line: usize },
    #[error("line {line}: instruction outside any procedure")]
    InstructionOutsideProc { line: usize },
    #[error("line {line}: procedure `{name}` has an empty body")]
    EmptySubroutine { name: String, line: usize },
}

impl ListingError {
    pub fn line(&self) -> usize {
        match self {
            ListingError::UnterminatedProc { line, .. }
            | ListingError::EndpWithoutProc { line, .. }
            | ListingError::MismatchedEndp { line, .. }
            | ListingError::DuplicateProc { line, .. }
            | ListingError::InstructionOutsideProc { line }
            | ListingError::EmptySubroutine { line, .. } => *line,
        }
    }
}

/// Parses a listing, rejecting empty procedure bodies.
pub fn parse_listing(text: &str, id: &str) -> Result<Program, ListingError> {
    parse_listing_with(text, id, ParseOptions::default())
}

pub fn parse_listing_with(
    text: &str,
    id: &str,
    options: ParseOptions,
) -> Result<Program, ListingError> {
    let mut subroutines: Vec<Subroutine> = Vec::new();
    let mut seen = HashSet::new();
    // (subroutine under construction, line of its `proc`)
    let mut open: Option<(Subroutine, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        match classify_line(raw) {
            Line::Skip => {}
            Line::Proc(name) => {
                if let Some((sub, opened)) = open.take() {
                    return Err(ListingError::UnterminatedProc {
                        name: sub.name,
                        line: opened,
                    });
                }
                if !seen.insert(name.to_string()) {
                    return Err(ListingError::DuplicateProc {
                        name: name.to_string(),
                        line: line_no,
                    });
                }
                open = Some((Subroutine::new(name, Vec::new()), line_no));
            }
            Line::Endp(name) => match open.take() {
                None => {
                    return Err(ListingError::EndpWithoutProc {
                        name: name.to_string(),
                        line: line_no,
                    })
                }
                Some((sub, _)) if sub.name != name => {
                    return Err(ListingError::MismatchedEndp {
                        expected: sub.name,
                        found: name.to_string(),
                        line: line_no,
                    })
                }
                Some((sub, opened)) => {
                    if sub.is_empty() && options.empty_body == EmptyBodyPolicy::Reject {
                        return Err(ListingError::EmptySubroutine {
                            name: sub.name,
                            line: opened,
                        });
                    }
                    subroutines.push(sub);
                }
            },
            Line::Label(name, rest) => {
                let Some((sub, _)) = open.as_mut() else {
                    if rest.is_some() {
                        return Err(ListingError::InstructionOutsideProc { line: line_no });
                    }
                    continue;
                };
                sub.labels.push(Label {
                    name: name.to_string(),
                    position: sub.instructions.len(),
                });
                if let Some(rest) = rest {
                    sub.instructions.push(parse_instruction(rest, line_no));
                }
            }
            Line::Instruction(body) => match open.as_mut() {
                Some((sub, _)) => sub.instructions.push(parse_instruction(body, line_no)),
                None => return Err(ListingError::InstructionOutsideProc { line: line_no }),
            },
        }
    }

    if let Some((sub, opened)) = open {
        return Err(ListingError::UnterminatedProc {
            name: sub.name,
            line: opened,
        });
    }

    Ok(Program {
        id: id.to_string(),
        subroutines,
    })
}

/// Returns the program's subroutines in source order.
pub fn split_subroutines(program: &Program) -> &[Subroutine] {
    &program.subroutines
}

enum Line<'a> {
    Skip,
    Proc(&'a str),
    Endp(&'a str),
    /// A label, optionally followed by an instruction on the same line.
    Label(&'a str, Option<&'a str>),
    Instruction(&'a str),
}

fn strip_comment(line: &str) -> &str {
    let mut in_quote: Option<char> = None;
    for (i, c) in line.char_indices() {
        match (in_quote, c) {
            (None, ';') => return &line[..i],
            (None, '\'' | '"') => in_quote = Some(c),
            (Some(q), c) if c == q => in_quote = None,
            _ => {}
        }
    }
    line
}

fn classify_line(raw: &str) -> Line<'_> {
    let line = strip_comment(raw).trim();
    if line.is_empty() {
        return Line::Skip;
    }
    let mut tokens = line.split_whitespace();
    let first = tokens.next().unwrap_or_default();
    let second = tokens.next();

    match second.map(str::to_ascii_lowercase).as_deref() {
        Some("proc") => return Line::Proc(first),
        Some("endp") => return Line::Endp(first),
        Some(kw) if NAMED_DIRECTIVES.contains(&kw) => return Line::Skip,
        _ => {}
    }

    if first.starts_with('.') || DIRECTIVES.contains(&first.to_ascii_lowercase().as_str()) {
        return Line::Skip;
    }

    if let Some(colon) = line.find(':') {
        let name = &line[..colon];
        if is_identifier(name) {
            let rest = line[colon + 1..].trim();
            return Line::Label(name, (!rest.is_empty()).then_some(rest));
        }
    }

    Line::Instruction(line)
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '@' | '?' | '.'))
}

fn parse_instruction(body: &str, line_no: usize) -> Instruction {
    let (head, mut rest) = split_first_token(body);
    let mut mnemonic = head.to_ascii_lowercase();
    if PREFIXES.contains(&mnemonic.as_str()) {
        let (next, after) = split_first_token(rest);
        if !next.is_empty() {
            mnemonic = format!("{mnemonic}.{}", next.to_ascii_lowercase());
            rest = after;
        }
    }
    Instruction {
        mnemonic,
        operands: split_operands(rest),
        line_no,
    }
}

fn split_first_token(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], s[i..].trim_start()),
        None => (s, ""),
    }
}

/// Splits on top-level commas, leaving commas inside brackets, parentheses
/// or quotes alone.
fn split_operands(s: &str) -> Vec<String> {
    let s = s.trim();
    if s.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut in_quote: Option<char> = None;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match (in_quote, c) {
            (Some(q), c) if c == q => in_quote = None,
            (Some(_), _) => {}
            (None, '\'' | '"') => in_quote = Some(c),
            (None, '[' | '(') => depth += 1,
            (None, ']' | ')') => depth -= 1,
            (None, ',') if depth <= 0 => {
                out.push(s[start..i].trim().to_string());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim().to_string());
    out
}
