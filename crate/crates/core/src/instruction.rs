//! Basic corrective instructions rendered from per-operation templates.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::edit::{AtomicEdit, EditKind};
use crate::error::{Error, Result};
use crate::layout::SNIPPET_FRAMES;

/// Template placeholders. Times are in seconds.
pub const PLACEHOLDERS: [&str; 6] = ["{dur}", "{start}", "{end}", "{snippet_end}", "{sentence}", "{part}"];

/// Default templates in the order of [`EditKind::ALL`].
pub const DEFAULT_TEMPLATES: [&str; 11] = [
    "Stay still for {dur}s at the start of the motion.",
    "stay still for {dur}s after {start}s of the motion.",
    "Stay still for {dur}s at the end of the motion.",
    "Repeat the first {dur}s of motion at the start.",
    "Repeat the {start}s-{end}s of motion after {end} of the motion.",
    "Repeat the last {dur}s of motion at the end.",
    "Delete the first {dur}s of motion.",
    "Delete {start}-{end} of motion.",
    "Delete the last {dur}s of motion.",
    "Add the body part movement: {sentence} in {start}-{snippet_end} of the motion.",
    "Delete the movement of {part} in {start}-{snippet_end} of the motion.",
];

/// Seconds rounded to one decimal, without a trailing ".0".
pub fn format_seconds(x: f64) -> String {
    let tenths = libm::round(x * 10.0) as i64;
    if tenths % 10 == 0 {
        alloc::format!("{}", tenths / 10)
    } else {
        alloc::format!("{}.{}", tenths / 10, (tenths % 10).abs())
    }
}

/// Placeholder values for one edit.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Slots {
    pub dur: String,
    pub start: String,
    pub end: String,
    pub snippet_end: String,
    pub sentence: String,
    pub part: String,
}

impl Slots {
    pub fn for_edit(e: &AtomicEdit, fps: f64) -> Slots {
        let (p, n) = (e.p() as f64, e.n() as f64);
        let s = SNIPPET_FRAMES as f64;
        Slots {
            dur: format_seconds(s * n / fps),
            start: format_seconds(s * (p - 1.0) / fps),
            end: format_seconds(s * (p + n - 1.0) / fps),
            snippet_end: format_seconds(s * p / fps),
            sentence: e.sentence().map(|x| x.bare().to_string()).unwrap_or_default(),
            part: e.body_part().map(|b| b.display_name().to_string()).unwrap_or_default(),
        }
    }

    fn get(&self, name: &str) -> &str {
        match name {
            "{dur}" => &self.dur,
            "{start}" => &self.start,
            "{end}" => &self.end,
            "{snippet_end}" => &self.snippet_end,
            "{sentence}" => &self.sentence,
            "{part}" => &self.part,
            _ => "",
        }
    }

    fn set(&mut self, name: &str, value: &str) {
        let slot = match name {
            "{dur}" => &mut self.dur,
            "{start}" => &mut self.start,
            "{end}" => &mut self.end,
            "{snippet_end}" => &mut self.snippet_end,
            "{sentence}" => &mut self.sentence,
            "{part}" => &mut self.part,
            _ => return,
        };
        *slot = value.to_string();
    }
}

enum Piece<'a> {
    Lit(&'a str),
    Hole(&'static str),
}

fn pieces(template: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = template;
    while !rest.is_empty() {
        let next = PLACEHOLDERS
            .iter()
            .filter_map(|h| rest.find(h).map(|i| (i, *h)))
            .min_by_key(|(i, _)| *i);
        match next {
            Some((i, h)) => {
                if i > 0 {
                    out.push(Piece::Lit(&rest[..i]));
                }
                out.push(Piece::Hole(h));
                rest = &rest[i + h.len()..];
            }
            None => {
                out.push(Piece::Lit(rest));
                rest = "";
            }
        }
    }
    out
}

/// Substitutes placeholders in `template`.
pub fn fill(template: &str, slots: &Slots) -> String {
    let mut out = String::with_capacity(template.len() + 32);
    for piece in pieces(template) {
        match piece {
            Piece::Lit(s) => out.push_str(s),
            Piece::Hole(h) => out.push_str(slots.get(h)),
        }
    }
    out
}

/// Recovers placeholder values by matching `text` against `template`.
/// Holes match lazily up to the next literal.
pub fn extract(template: &str, text: &str) -> Option<Slots> {
    let ps = pieces(template);
    let mut slots = Slots::default();
    let mut rest = text;
    let mut i = 0;
    while i < ps.len() {
        match ps[i] {
            Piece::Lit(l) => rest = rest.strip_prefix(l)?,
            Piece::Hole(h) => {
                let value = match ps.get(i + 1) {
                    Some(Piece::Lit(next)) => {
                        let at = rest.find(next)?;
                        let v = &rest[..at];
                        rest = &rest[at..];
                        v
                    }
                    Some(Piece::Hole(_)) => return None,
                    None => core::mem::take(&mut rest),
                };
                let prior = slots.get(h);
                if !prior.is_empty() && prior != value {
                    return None;
                }
                slots.set(h, value);
            }
        }
        i += 1;
    }
    rest.is_empty().then_some(slots)
}

/// One template per edit kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    templates: Vec<String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet {
            templates: DEFAULT_TEMPLATES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TemplateSet {
    pub fn with(mut self, kind: EditKind, template: &str) -> Result<TemplateSet> {
        if template.trim().is_empty() {
            return Err(Error::InvalidArgument(alloc::format!("empty template for {kind}")));
        }
        self.templates[kind.index()] = template.to_string();
        Ok(self)
    }

    pub fn get(&self, kind: EditKind) -> &str {
        &self.templates[kind.index()]
    }

    pub fn render(&self, e: &AtomicEdit, fps: f64) -> String {
        fill(self.get(e.kind()), &Slots::for_edit(e, fps))
    }
}

/// Renders `e` with the default templates.
pub fn render_instruction(e: &AtomicEdit, fps: f64) -> String {
    TemplateSet::default().render(e, fps)
}

/// Numeric tokens (integers or decimals) in order of appearance.
pub fn time_tokens(text: &str) -> Vec<&str> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
                i += 1;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(&text[start..i]);
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::{Reverts, Scope};
    use crate::script::Sentence;
    use alloc::vec;

    #[test]
    fn seconds_formatting() {
        assert_eq!(format_seconds(1.5), "1.5");
        assert_eq!(format_seconds(2.0), "2");
        assert_eq!(format_seconds(0.0), "0");
        assert_eq!(format_seconds(10.0 / 3.0), "3.3");
        assert_eq!(format_seconds(0.25), "0.3");
    }

    #[test]
    fn spec_examples() {
        let e = AtomicEdit::Pad { scope: Scope::Middle, p: 2, n: 3 };
        assert_eq!(render_instruction(&e, 20.0), "stay still for 1.5s after 0.5s of the motion.");
        let e = AtomicEdit::Repeat { scope: Scope::Start, p: 1, n: 2 };
        assert_eq!(render_instruction(&e, 20.0), "Repeat the first 1s of motion at the start.");
    }

    #[test]
    fn spatial_rows() {
        let s = Sentence::new("the left arm waves.").unwrap();
        let e = AtomicEdit::SpatialDelete { p: 1, sentence: s.clone(), j: 1 };
        assert_eq!(render_instruction(&e, 20.0), "Delete the movement of left arm in 0-0.5 of the motion.");
        let e = AtomicEdit::SpatialAdd { p: 1, sentence: s, j: 1 };
        assert_eq!(
            render_instruction(&e, 20.0),
            "Add the body part movement: the left arm waves in 0-0.5 of the motion."
        );
    }

    #[test]
    fn custom_template_with_units() {
        let t = TemplateSet::default()
            .with(EditKind::SpatialDelete, "Delete the movement of {part} in {start}s-{snippet_end}s of the motion.")
            .unwrap();
        let s = Sentence::new("the left arm waves.").unwrap();
        let e = AtomicEdit::SpatialDelete { p: 1, sentence: s, j: 1 };
        assert_eq!(t.render(&e, 20.0), "Delete the movement of left arm in 0s-0.5s of the motion.");
    }

    #[test]
    fn delete_rows_use_their_own_indices() {
        let e = AtomicEdit::Delete { scope: Scope::Middle, p: 2, n: 3, reverts: Reverts::Padding };
        assert_eq!(render_instruction(&e, 20.0), "Delete 0.5-2 of motion.");
    }

    #[test]
    fn extract_inverts_fill() {
        let e = AtomicEdit::Repeat { scope: Scope::Middle, p: 2, n: 3 };
        let text = render_instruction(&e, 20.0);
        let slots = extract(DEFAULT_TEMPLATES[4], &text).unwrap();
        assert_eq!((slots.start.as_str(), slots.end.as_str()), ("0.5", "2"));
        assert_eq!(fill(DEFAULT_TEMPLATES[4], &slots), text);
        assert!(extract(DEFAULT_TEMPLATES[0], &text).is_none());
    }

    #[test]
    fn numeric_tokens() {
        assert_eq!(time_tokens("Repeat the 0.5s-2s of motion after 2 of the motion."), vec!["0.5", "2", "2"]);
        assert_eq!(time_tokens("end."), Vec::<&str>::new());
    }
}
