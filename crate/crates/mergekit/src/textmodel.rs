//! Text as a sequence of lines, plus the character explosion used by the
//! high-resolution merge strategy.
//!
//! All processing is byte-transparent: input that is not valid UTF-8 is
//! split at LF boundaries exactly like valid text, so a merge never
//! corrupts data it does not understand.

use crate::error::{Error, Result};

/// Line terminator kind. `None` only ever appears on the final line of a
/// document.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terminator {
    Lf,
    CrLf,
    None,
}

impl Terminator {
    pub fn as_bytes(self) -> &'static [u8] {
        match self {
            Terminator::Lf => b"\n",
            Terminator::CrLf => b"\r\n",
            Terminator::None => b"",
        }
    }
}

/// One line of text. `content` never contains a newline byte; the
/// terminator is kept separately so that rejoining is byte-exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub content: Vec<u8>,
    pub terminator: Terminator,
}

impl Line {
    pub fn new(content: impl Into<Vec<u8>>, terminator: Terminator) -> Self {
        Line { content: content.into(), terminator }
    }

    pub fn content_str(&self) -> Option<&str> {
        std::str::from_utf8(&self.content).ok()
    }
}

/// A file's content as a line sequence. Rejoining the lines with their
/// terminators reproduces the original bytes exactly.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Document {
    pub lines: Vec<Line>,
}

impl Document {
    pub fn empty() -> Self {
        Document { lines: Vec::new() }
    }

    pub fn from_lines(lines: Vec<Line>) -> Self {
        Document { lines }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut lines = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == b'\n' {
                let (content_end, term) = if i > start && bytes[i - 1] == b'\r' {
                    (i - 1, Terminator::CrLf)
                } else {
                    (i, Terminator::Lf)
                };
                lines.push(Line::new(&bytes[start..content_end], term));
                start = i + 1;
            }
            i += 1;
        }
        if start < bytes.len() {
            lines.push(Line::new(&bytes[start..], Terminator::None));
        }
        Document { lines }
    }

    pub fn from_str(text: &str) -> Self {
        Self::from_bytes(text.as_bytes())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for line in &self.lines {
            out.extend_from_slice(&line.content);
            out.extend_from_slice(line.terminator.as_bytes());
        }
        out
    }

    pub fn to_string_lossy(&self) -> String {
        String::from_utf8_lossy(&self.to_bytes()).into_owned()
    }

    pub fn trailing_newline(&self) -> bool {
        self.lines
            .last()
            .map(|l| l.terminator != Terminator::None)
            .unwrap_or(false)
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }
}

/// Whitespace handling for line comparison. The mode only affects
/// comparison keys; emitted text is never rewritten.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WhitespaceMode {
    #[default]
    Exact,
    IgnoreSpaceChange,
}

/// Canonical comparison key for a line. Two lines compare equal under a
/// mode iff their keys are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LineKey(pub Vec<u8>);

/// ASCII space and tab. The terminator is not part of the key, so a
/// CRLF/LF difference alone never causes a conflict.
fn is_space(b: u8) -> bool {
    b == b' ' || b == b'\t'
}

pub fn line_key(line: &Line, ws: WhitespaceMode) -> LineKey {
    match ws {
        WhitespaceMode::Exact => LineKey(line.content.clone()),
        WhitespaceMode::IgnoreSpaceChange => LineKey(normalize_ws(&line.content)),
    }
}

/// Collapse each run of spaces/tabs to a single space, then drop trailing
/// whitespace.
fn normalize_ws(content: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(content.len());
    let mut i = 0;
    while i < content.len() {
        if is_space(content[i]) {
            while i < content.len() && is_space(content[i]) {
                i += 1;
            }
            out.push(b' ');
        } else {
            out.push(content[i]);
            i += 1;
        }
    }
    while out.last() == Some(&b' ') {
        out.pop();
    }
    out
}

/// Put every character (or every byte, for non-UTF-8 content) on its own
/// line. Each terminator becomes a sentinel line whose content is the
/// terminator's own bytes; since ordinary line content never contains a
/// newline, sentinels are distinct from every single-character line.
pub fn explode_chars(doc: &Document) -> Document {
    let mut lines = Vec::new();
    for line in &doc.lines {
        match line.content_str() {
            Some(s) => {
                for ch in s.chars() {
                    let mut buf = [0u8; 4];
                    let encoded = ch.encode_utf8(&mut buf);
                    lines.push(Line::new(encoded.as_bytes(), Terminator::None));
                }
            }
            None => {
                for &b in &line.content {
                    lines.push(Line::new(vec![b], Terminator::None));
                }
            }
        }
        if line.terminator != Terminator::None {
            lines.push(Line::new(line.terminator.as_bytes(), Terminator::None));
        }
    }
    Document { lines }
}

/// Inverse of [`explode_chars`].
pub fn implode_chars(doc: &Document) -> Result<Document> {
    let mut lines = Vec::new();
    let mut acc: Vec<u8> = Vec::new();
    for (idx, line) in doc.lines.iter().enumerate() {
        if line.terminator != Terminator::None {
            return Err(Error::MalformedExplodedForm {
                line: idx,
                reason: "exploded lines carry no terminator".into(),
            });
        }
        match line.content.as_slice() {
            b"\n" => {
                lines.push(Line::new(std::mem::take(&mut acc), Terminator::Lf));
            }
            b"\r\n" => {
                lines.push(Line::new(std::mem::take(&mut acc), Terminator::CrLf));
            }
            content => {
                let single_char = match std::str::from_utf8(content) {
                    Ok(s) => s.chars().count() == 1,
                    Err(_) => content.len() == 1,
                };
                if !single_char {
                    return Err(Error::MalformedExplodedForm {
                        line: idx,
                        reason: "expected a single character or a newline sentinel".into(),
                    });
                }
                acc.extend_from_slice(content);
            }
        }
    }
    if !acc.is_empty() {
        lines.push(Line::new(acc, Terminator::None));
    }
    Ok(Document { lines })
}
