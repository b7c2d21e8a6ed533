//! Text renderings of motion tokens and fine-grained scripts.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, Result};
use crate::script::{FineScript, Sentence, Snippet};

pub const MOTION_OPEN: &str = "<Motion Tokens>";
pub const MOTION_CLOSE: &str = "</Motion Tokens>";
pub const SEP: &str = "<SEP>";
pub const MOTIONLESS: &str = "<Motionless>";
pub const SPECIAL_TOKENS: [&str; 4] = [MOTION_OPEN, MOTION_CLOSE, SEP, MOTIONLESS];

/// The literal symbol for motion token `i` (1-based).
pub fn motion_symbol(i: u32) -> String {
    alloc::format!("<{i}>")
}

/// True when `s` contains any special token literal.
pub fn contains_special(s: &str) -> bool {
    SPECIAL_TOKENS.iter().any(|t| s.contains(t))
}

pub fn render_motion_text(tokens: &[u32]) -> String {
    let mut out = String::with_capacity(MOTION_OPEN.len() + MOTION_CLOSE.len() + tokens.len() * 5);
    out.push_str(MOTION_OPEN);
    for t in tokens {
        let _ = write!(out, "<{t}>");
    }
    out.push_str(MOTION_CLOSE);
    out
}

/// Extracts the token list from the single delimited block in `s`.
/// Consecutive symbols may be separated by at most one space.
pub fn parse_motion_text(s: &str, cb_size: usize) -> Result<Vec<u32>> {
    let open = s.find(MOTION_OPEN).ok_or_else(|| Error::MalformedDelimiters("missing opening delimiter".into()))?;
    if s[open + MOTION_OPEN.len()..].contains(MOTION_OPEN) {
        return Err(Error::MalformedDelimiters("more than one opening delimiter".into()));
    }
    let body_start = open + MOTION_OPEN.len();
    let close = s[body_start..]
        .find(MOTION_CLOSE)
        .map(|c| c + body_start)
        .ok_or_else(|| Error::MalformedDelimiters("unclosed motion block".into()))?;
    if s[close + MOTION_CLOSE.len()..].contains(MOTION_CLOSE) || s[..open].contains(MOTION_CLOSE) {
        return Err(Error::MalformedDelimiters("more than one closing delimiter".into()));
    }
    let body = &s[body_start..close];
    let bytes = body.as_bytes();
    let garbage = |at: usize| Error::GarbageInsideBlock(String::from(&body[at..]));
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b' ' {
            // a single space is only allowed between two symbols
            if tokens.is_empty() || i + 1 >= bytes.len() || bytes[i + 1] != b'<' {
                return Err(garbage(i));
            }
            i += 1;
        }
        if bytes[i] != b'<' {
            return Err(garbage(i));
        }
        let digits_start = i + 1;
        let mut j = digits_start;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == digits_start || j >= bytes.len() || bytes[j] != b'>' || bytes[digits_start] == b'0' && j - digits_start > 1 {
            return Err(garbage(i));
        }
        let value: u64 = body[digits_start..j].parse().unwrap_or(u64::MAX);
        if value == 0 || value > cb_size as u64 {
            return Err(Error::TokenOutOfRange { token: value, max: cb_size });
        }
        tokens.push(value as u32);
        i = j + 1;
    }
    Ok(tokens)
}

pub fn render_snippet(s: &Snippet) -> String {
    match s {
        Snippet::Motionless => String::from(MOTIONLESS),
        Snippet::Sentences(v) => {
            let mut out = String::new();
            for (i, sen) in v.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(sen.text());
            }
            out
        }
    }
}

pub fn render_fine_script(fs: &FineScript) -> String {
    let mut out = String::new();
    for (i, s) in fs.snippets().iter().enumerate() {
        if i > 0 {
            out.push_str(SEP);
        }
        out.push_str(&render_snippet(s));
    }
    out
}

/// Splits one snippet's text into sentences at ". " boundaries.
pub fn parse_snippet(text: &str, position: usize) -> Result<Snippet> {
    if text.is_empty() {
        return Err(Error::EmptySnippet(position));
    }
    if text == MOTIONLESS {
        return Ok(Snippet::Motionless);
    }
    if contains_special(text) {
        return Err(Error::InvalidSentence(String::from(text)));
    }
    let mut sentences = Vec::new();
    let mut rest = text;
    while let Some(cut) = rest.find(". ") {
        sentences.push(parse_sentence(&rest[..=cut])?);
        rest = &rest[cut + 2..];
    }
    sentences.push(parse_sentence(rest)?);
    Ok(Snippet::Sentences(sentences))
}

fn parse_sentence(text: &str) -> Result<Sentence> {
    if !text.ends_with('.') || text.trim() != text {
        return Err(Error::InvalidSentence(String::from(text)));
    }
    Sentence::new(text)
}

pub fn parse_fine_script(s: &str) -> Result<FineScript> {
    let snippets = s
        .split(SEP)
        .enumerate()
        .map(|(i, seg)| parse_snippet(seg, i + 1))
        .collect::<Result<Vec<_>>>()?;
    FineScript::new(snippets)
}
