//! Fine-grained motion scripts: per-snippet sets of body-part sentences.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{BodyPart, MAX_SNIPPETS};

/// One body-part-movement sentence, always terminated by a period.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sentence {
    text: String,
    part: BodyPart,
}

impl Sentence {
    /// Normalizes whitespace, appends a missing final period and infers the
    /// body part from the wording.
    pub fn new(text: &str) -> Result<Sentence> {
        let text = normalize(text);
        validate_text(&text)?;
        let part = BodyPart::from_sentence(&text).ok_or_else(|| Error::UnknownBodyPart(text.clone()))?;
        Ok(Sentence { text, part })
    }

    /// Like [`Sentence::new`] but requires the inferred part to equal `part`.
    pub fn tagged(text: &str, part: BodyPart) -> Result<Sentence> {
        let s = Sentence::new(text)?;
        if s.part != part {
            return Err(Error::InvalidSentence(alloc::format!(
                "{} reads as {} but is tagged {}",
                s.text,
                s.part.name(),
                part.name()
            )));
        }
        Ok(s)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn part(&self) -> BodyPart {
        self.part
    }

    /// The sentence without its final period, for embedding in other text.
    pub fn bare(&self) -> &str {
        self.text.strip_suffix('.').unwrap_or(&self.text)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 1);
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    if !out.is_empty() && !out.ends_with('.') {
        out.push('.');
    }
    out
}

fn validate_text(text: &str) -> Result<()> {
    let bad = |why: &str| Err(Error::InvalidSentence(alloc::format!("{text}: {why}")));
    if text.len() < 2 || !text.ends_with('.') {
        return bad("empty");
    }
    if text.contains('<') || text.contains('>') {
        return bad("contains token brackets");
    }
    if text[..text.len() - 1].contains(". ") {
        return bad("holds more than one sentence");
    }
    if text.chars().any(char::is_control) {
        return bad("contains control characters");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "sentences", rename_all = "snake_case")]
pub enum Snippet {
    Motionless,
    Sentences(Vec<Sentence>),
}

impl Snippet {
    pub fn sentences(&self) -> &[Sentence] {
        match self {
            Snippet::Motionless => &[],
            Snippet::Sentences(s) => s,
        }
    }

    pub fn is_motionless(&self) -> bool {
        matches!(self, Snippet::Motionless)
    }

    pub fn has_part(&self, part: BodyPart) -> bool {
        self.sentences().iter().any(|s| s.part() == part)
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences().len()
    }
}

/// Ordered snippet descriptions; between 1 and 20 snippets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Snippet>", into = "Vec<Snippet>")]
pub struct FineScript {
    snippets: Vec<Snippet>,
}

impl FineScript {
    pub fn new(snippets: Vec<Snippet>) -> Result<FineScript> {
        if snippets.is_empty() || snippets.len() > MAX_SNIPPETS {
            return Err(Error::InvalidScript(alloc::format!(
                "{} snippets, need 1..={MAX_SNIPPETS}",
                snippets.len()
            )));
        }
        for (i, s) in snippets.iter().enumerate() {
            if let Snippet::Sentences(v) = s {
                if v.is_empty() {
                    return Err(Error::EmptySnippet(i + 1));
                }
            }
        }
        Ok(FineScript { snippets })
    }

    pub fn snippets(&self) -> &[Snippet] {
        &self.snippets
    }

    /// 1-based snippet access.
    pub fn snippet(&self, p: usize) -> Option<&Snippet> {
        p.checked_sub(1).and_then(|i| self.snippets.get(i))
    }

    pub fn len(&self) -> usize {
        self.snippets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snippets.is_empty()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.snippets.iter().flat_map(|s| s.sentences().iter())
    }

    pub(crate) fn from_unchecked(snippets: Vec<Snippet>) -> FineScript {
        FineScript { snippets }
    }

    pub fn into_snippets(self) -> Vec<Snippet> {
        self.snippets
    }
}

impl TryFrom<Vec<Snippet>> for FineScript {
    type Error = Error;
    fn try_from(v: Vec<Snippet>) -> Result<FineScript> {
        FineScript::new(v)
    }
}

impl From<FineScript> for Vec<Snippet> {
    fn from(fs: FineScript) -> Vec<Snippet> {
        fs.snippets
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sentence_normalization() {
        let s = Sentence::new("  the left arm   waves ").unwrap();
        assert_eq!(s.text(), "the left arm waves.");
        assert_eq!(s.part(), BodyPart::LeftArm);
        assert_eq!(s.bare(), "the left arm waves");
    }

    #[test]
    fn sentence_rejections() {
        assert!(matches!(Sentence::new(""), Err(Error::InvalidSentence(_))));
        assert!(matches!(Sentence::new("the <SEP> arm."), Err(Error::InvalidSentence(_))));
        assert!(matches!(
            Sentence::new("the left arm waves. the head nods."),
            Err(Error::InvalidSentence(_))
        ));
        assert!(matches!(Sentence::new("someone waits."), Err(Error::UnknownBodyPart(_))));
    }

    #[test]
    fn tagged_checks_agreement() {
        assert!(Sentence::tagged("the head nods.", BodyPart::Head).is_ok());
        assert!(Sentence::tagged("the head nods.", BodyPart::Torso).is_err());
    }

    #[test]
    fn script_bounds() {
        assert!(FineScript::new(vec![]).is_err());
        assert!(FineScript::new(vec![Snippet::Motionless; 21]).is_err());
        assert!(FineScript::new(vec![Snippet::Motionless; 20]).is_ok());
        assert!(matches!(
            FineScript::new(vec![Snippet::Motionless, Snippet::Sentences(vec![])]),
            Err(Error::EmptySnippet(2))
        ));
    }
}
