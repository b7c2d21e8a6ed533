//! The eleven atomic edits, their script semantics and inverses.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{BodyPart, MAX_SNIPPETS, SNIPPET_FRAMES};
use crate::script::{FineScript, Sentence, Snippet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Start,
    Middle,
    End,
}

/// What a temporal deletion undoes: a padded (motionless) block or a
/// duplicated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reverts {
    Padding,
    Repeating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    PadStart,
    PadMiddle,
    PadEnd,
    RepeatStart,
    RepeatMiddle,
    RepeatEnd,
    DeleteStart,
    DeleteMiddle,
    DeleteEnd,
    SpatialAdd,
    SpatialDelete,
}

impl EditKind {
    pub const ALL: [EditKind; 11] = [
        EditKind::PadStart,
        EditKind::PadMiddle,
        EditKind::PadEnd,
        EditKind::RepeatStart,
        EditKind::RepeatMiddle,
        EditKind::RepeatEnd,
        EditKind::DeleteStart,
        EditKind::DeleteMiddle,
        EditKind::DeleteEnd,
        EditKind::SpatialAdd,
        EditKind::SpatialDelete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EditKind::PadStart => "pad_start",
            EditKind::PadMiddle => "pad_middle",
            EditKind::PadEnd => "pad_end",
            EditKind::RepeatStart => "repeat_start",
            EditKind::RepeatMiddle => "repeat_middle",
            EditKind::RepeatEnd => "repeat_end",
            EditKind::DeleteStart => "delete_start",
            EditKind::DeleteMiddle => "delete_middle",
            EditKind::DeleteEnd => "delete_end",
            EditKind::SpatialAdd => "spatial_add",
            EditKind::SpatialDelete => "spatial_delete",
        }
    }

    pub fn from_name(s: &str) -> Option<EditKind> {
        EditKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Position in the instruction template table, 0-based.
    pub fn index(self) -> usize {
        EditKind::ALL.iter().position(|&k| k == self).unwrap_or(0)
    }

    pub fn is_temporal(self) -> bool {
        !self.is_spatial()
    }

    pub fn is_spatial(self) -> bool {
        matches!(self, EditKind::SpatialAdd | EditKind::SpatialDelete)
    }

    pub fn is_insertion(self) -> bool {
        matches!(
            self,
            EditKind::PadStart
                | EditKind::PadMiddle
                | EditKind::PadEnd
                | EditKind::RepeatStart
                | EditKind::RepeatMiddle
                | EditKind::RepeatEnd
        )
    }

    pub fn is_deletion(self) -> bool {
        matches!(
            self,
            EditKind::DeleteStart | EditKind::DeleteMiddle | EditKind::DeleteEnd | EditKind::SpatialDelete
        )
    }

    pub fn scope(self) -> Option<Scope> {
        match self {
            EditKind::PadStart | EditKind::RepeatStart | EditKind::DeleteStart => Some(Scope::Start),
            EditKind::PadMiddle | EditKind::RepeatMiddle | EditKind::DeleteMiddle => Some(Scope::Middle),
            EditKind::PadEnd | EditKind::RepeatEnd | EditKind::DeleteEnd => Some(Scope::End),
            _ => None,
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A parameterized atomic edit. Snippet indices are 1-based and refer to the
/// script the edit is applied to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AtomicEdit {
    /// Insert `n` motionless snippets before snippet `p` (`p = k + 1` appends).
    Pad { scope: Scope, p: usize, n: usize },
    /// Duplicate snippets `[p, p + n)` right after themselves.
    Repeat { scope: Scope, p: usize, n: usize },
    /// Remove snippets `[p, p + n)`.
    Delete { scope: Scope, p: usize, n: usize, reverts: Reverts },
    /// Insert `sentence` at position `j` (1-based) of snippet `p`.
    SpatialAdd { p: usize, sentence: Sentence, j: usize },
    /// Remove every sentence of `sentence`'s body part from snippet `p`;
    /// `sentence` and `j` record what the inverse puts back.
    SpatialDelete { p: usize, sentence: Sentence, j: usize },
}

impl AtomicEdit {
    pub fn kind(&self) -> EditKind {
        use AtomicEdit::*;
        match self {
            Pad { scope: Scope::Start, .. } => EditKind::PadStart,
            Pad { scope: Scope::Middle, .. } => EditKind::PadMiddle,
            Pad { scope: Scope::End, .. } => EditKind::PadEnd,
            Repeat { scope: Scope::Start, .. } => EditKind::RepeatStart,
            Repeat { scope: Scope::Middle, .. } => EditKind::RepeatMiddle,
            Repeat { scope: Scope::End, .. } => EditKind::RepeatEnd,
            Delete { scope: Scope::Start, .. } => EditKind::DeleteStart,
            Delete { scope: Scope::Middle, .. } => EditKind::DeleteMiddle,
            Delete { scope: Scope::End, .. } => EditKind::DeleteEnd,
            SpatialAdd { .. } => EditKind::SpatialAdd,
            SpatialDelete { .. } => EditKind::SpatialDelete,
        }
    }

    pub fn p(&self) -> usize {
        match *self {
            AtomicEdit::Pad { p, .. }
            | AtomicEdit::Repeat { p, .. }
            | AtomicEdit::Delete { p, .. }
            | AtomicEdit::SpatialAdd { p, .. }
            | AtomicEdit::SpatialDelete { p, .. } => p,
        }
    }

    /// Segment length in snippets; 1 for spatial edits.
    pub fn n(&self) -> usize {
        match *self {
            AtomicEdit::Pad { n, .. } | AtomicEdit::Repeat { n, .. } | AtomicEdit::Delete { n, .. } => n,
            _ => 1,
        }
    }

    pub fn sentence(&self) -> Option<&Sentence> {
        match self {
            AtomicEdit::SpatialAdd { sentence, .. } | AtomicEdit::SpatialDelete { sentence, .. } => Some(sentence),
            _ => None,
        }
    }

    pub fn body_part(&self) -> Option<BodyPart> {
        self.sentence().map(Sentence::part)
    }

    /// Change in snippet count.
    pub fn snippet_delta(&self) -> isize {
        match self {
            AtomicEdit::Pad { n, .. } | AtomicEdit::Repeat { n, .. } => *n as isize,
            AtomicEdit::Delete { n, .. } => -(*n as isize),
            _ => 0,
        }
    }

    /// Change in frame count.
    pub fn frame_delta(&self) -> isize {
        self.snippet_delta() * SNIPPET_FRAMES as isize
    }

    /// The edit undoing `self`, indexed against the edited script.
    pub fn invert(&self) -> AtomicEdit {
        match self.clone() {
            AtomicEdit::Pad { scope, p, n } => AtomicEdit::Delete {
                scope,
                p,
                n,
                reverts: Reverts::Padding,
            },
            AtomicEdit::Repeat { scope, p, n } => AtomicEdit::Delete {
                scope,
                p: if scope == Scope::Start { p } else { p + n },
                n,
                reverts: Reverts::Repeating,
            },
            AtomicEdit::Delete {
                scope,
                p,
                n,
                reverts: Reverts::Padding,
            } => AtomicEdit::Pad { scope, p, n },
            AtomicEdit::Delete {
                scope,
                p,
                n,
                reverts: Reverts::Repeating,
            } => AtomicEdit::Repeat {
                scope,
                p: if scope == Scope::Start { p } else { p - n },
                n,
            },
            AtomicEdit::SpatialAdd { p, sentence, j } => AtomicEdit::SpatialDelete { p, sentence, j },
            AtomicEdit::SpatialDelete { p, sentence, j } => AtomicEdit::SpatialAdd { p, sentence, j },
        }
    }

    /// Checks the index parameters against a sequence of `k` snippets,
    /// without looking at snippet content.
    pub fn validate_indices(&self, k: usize) -> Result<()> {
        let range = |what: &str| -> Result<()> {
            Err(Error::ParamOutOfRange(alloc::format!("{what} for {} on {k} snippets", self.kind())))
        };
        match *self {
            AtomicEdit::Pad { scope, p, n } | AtomicEdit::Repeat { scope, p, n } => {
                if n == 0 {
                    return range("n = 0");
                }
                let ok = match (matches!(self, AtomicEdit::Pad { .. }), scope) {
                    (true, Scope::Start) => p == 1,
                    (true, Scope::Middle) => (2..=k).contains(&p),
                    (true, Scope::End) => p == k + 1,
                    (false, Scope::Start) => p == 1 && n <= k,
                    (false, Scope::Middle) => p >= 2 && p + n <= k,
                    (false, Scope::End) => p >= 1 && p + n - 1 == k,
                };
                if !ok {
                    return range(&alloc::format!("p = {p}, n = {n}"));
                }
                if k + n > MAX_SNIPPETS {
                    return Err(Error::SnippetBudgetExceeded {
                        snippets: k + n,
                        limit: MAX_SNIPPETS,
                    });
                }
            }
            AtomicEdit::Delete { scope, p, n, reverts } => {
                if n == 0 || n >= k {
                    return range(&alloc::format!("n = {n}"));
                }
                let ok = match (scope, reverts) {
                    (Scope::Start, Reverts::Padding) => p == 1,
                    (Scope::Start, Reverts::Repeating) => p == 1 && 2 * n <= k,
                    // the inverse repeat must stay strictly inside for the middle scope
                    (Scope::Middle, Reverts::Padding) => p >= 2 && p + n <= k,
                    (Scope::Middle, Reverts::Repeating) => p > n + 1 && p + n <= k,
                    (Scope::End, Reverts::Padding) => p + n - 1 == k,
                    (Scope::End, Reverts::Repeating) => p > n && p + n - 1 == k,
                };
                if !ok {
                    return range(&alloc::format!("p = {p}, n = {n}"));
                }
            }
            AtomicEdit::SpatialAdd { p, .. } | AtomicEdit::SpatialDelete { p, .. } => {
                if p == 0 || p > k {
                    return range(&alloc::format!("p = {p}"));
                }
            }
        }
        Ok(())
    }

    /// Checks the edit against a script, including its content.
    pub fn validate(&self, fs: &FineScript) -> Result<()> {
        self.validate_indices(fs.len())?;
        let range = |what: &str| -> Result<()> {
            Err(Error::ParamOutOfRange(alloc::format!("{what} for {} on {} snippets", self.kind(), fs.len())))
        };
        match self {
            AtomicEdit::Pad { .. } | AtomicEdit::Repeat { .. } => Ok(()),
            AtomicEdit::Delete { scope, p, n, reverts } => {
                let (p, n) = (*p, *n);
                let block = &fs.snippets()[p - 1..p - 1 + n];
                let content_ok = match reverts {
                    Reverts::Padding => block.iter().all(Snippet::is_motionless),
                    Reverts::Repeating => {
                        let twin = match scope {
                            Scope::Start => n..2 * n,
                            _ => p - 1 - n..p - 1,
                        };
                        fs.snippets()[twin] == *block
                    }
                };
                if !content_ok {
                    return Err(Error::InvalidScript(alloc::format!(
                        "snippets {p}..{} are not a removable {} block",
                        p + n - 1,
                        match reverts {
                            Reverts::Padding => "motionless",
                            Reverts::Repeating => "duplicated",
                        }
                    )));
                }
                Ok(())
            }
            AtomicEdit::SpatialAdd { p, sentence, j } => {
                let snip = &fs.snippets()[p - 1];
                if *j == 0 || *j > snip.sentence_count() + 1 {
                    return range(&alloc::format!("j = {j}"));
                }
                if snip.has_part(sentence.part()) {
                    return Err(Error::InvalidScript(alloc::format!(
                        "snippet {p} already describes the {}",
                        sentence.part().display_name()
                    )));
                }
                Ok(())
            }
            AtomicEdit::SpatialDelete { p, sentence, j } => {
                let snip = &fs.snippets()[p - 1];
                if !snip.has_part(sentence.part()) {
                    return Err(Error::BodyPartAbsent(alloc::string::String::from(sentence.part().name()), *p));
                }
                if *j == 0 || *j > snip.sentence_count() {
                    return range(&alloc::format!("j = {j}"));
                }
                Ok(())
            }
        }
    }

    /// Re-anchors end-scoped edits to the end of `fs`; other edits are
    /// returned unchanged.
    pub fn retarget(&self, fs: &FineScript) -> AtomicEdit {
        let k = fs.len();
        match *self {
            AtomicEdit::Pad { scope: Scope::End, n, .. } => AtomicEdit::Pad {
                scope: Scope::End,
                p: k + 1,
                n,
            },
            AtomicEdit::Repeat { scope: Scope::End, n, .. } if n <= k => AtomicEdit::Repeat {
                scope: Scope::End,
                p: k + 1 - n,
                n,
            },
            _ => self.clone(),
        }
    }
}

/// Applies `e` to the script.
pub fn apply_edit_script(fs: &FineScript, e: &AtomicEdit) -> Result<FineScript> {
    e.validate(fs)?;
    let mut v: Vec<Snippet> = fs.snippets().to_vec();
    match e {
        AtomicEdit::Pad { p, n, .. } => {
            let at = p - 1;
            v.splice(at..at, core::iter::repeat_n(Snippet::Motionless, *n));
        }
        AtomicEdit::Repeat { p, n, .. } => {
            let block: Vec<Snippet> = v[p - 1..p - 1 + n].to_vec();
            let at = p - 1 + n;
            v.splice(at..at, block);
        }
        AtomicEdit::Delete { p, n, .. } => {
            v.drain(p - 1..p - 1 + n);
        }
        AtomicEdit::SpatialAdd { p, sentence, j } => {
            let slot = &mut v[p - 1];
            match slot {
                Snippet::Motionless => *slot = Snippet::Sentences(alloc::vec![sentence.clone()]),
                Snippet::Sentences(s) => s.insert(j - 1, sentence.clone()),
            }
        }
        AtomicEdit::SpatialDelete { p, sentence, .. } => {
            let part = sentence.part();
            let slot = &mut v[p - 1];
            if let Snippet::Sentences(s) = slot {
                s.retain(|x| x.part() != part);
                if s.is_empty() {
                    *slot = Snippet::Motionless;
                }
            }
        }
    }
    Ok(FineScript::from_unchecked(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sen(t: &str) -> Sentence {
        Sentence::new(t).unwrap()
    }

    fn abc() -> FineScript {
        FineScript::new(vec![
            Snippet::Sentences(vec![sen("the left arm rises.")]),
            Snippet::Sentences(vec![sen("the head nods.")]),
            Snippet::Sentences(vec![sen("the right leg kicks.")]),
        ])
        .unwrap()
    }

    #[test]
    fn pad_middle_inserts_motionless() {
        let fs = abc();
        let out = apply_edit_script(&fs, &AtomicEdit::Pad { scope: Scope::Middle, p: 2, n: 2 }).unwrap();
        let s = out.snippets();
        assert_eq!(s.len(), 5);
        assert_eq!(s[0], fs.snippets()[0]);
        assert!(s[1].is_motionless() && s[2].is_motionless());
        assert_eq!(&s[3..], &fs.snippets()[1..]);
    }

    #[test]
    fn repeat_start_duplicates_block() {
        let fs = abc();
        let out = apply_edit_script(&fs, &AtomicEdit::Repeat { scope: Scope::Start, p: 1, n: 2 }).unwrap();
        let f = fs.snippets();
        assert_eq!(out.snippets(), &[f[0].clone(), f[1].clone(), f[0].clone(), f[1].clone(), f[2].clone()]);
    }

    #[test]
    fn spatial_add_inserts_at_position() {
        let fs = FineScript::new(vec![Snippet::Sentences(vec![sen("the left arm rises."), sen("the head nods.")])]).unwrap();
        let x = sen("the right knee bends.");
        let out = apply_edit_script(&fs, &AtomicEdit::SpatialAdd { p: 1, sentence: x.clone(), j: 2 }).unwrap();
        assert_eq!(
            out.snippets()[0].sentences(),
            &[sen("the left arm rises."), x, sen("the head nods.")]
        );
    }

    #[test]
    fn spatial_add_requires_absent_part() {
        let fs = abc();
        let e = AtomicEdit::SpatialAdd { p: 1, sentence: sen("the left hand waves."), j: 1 };
        assert!(matches!(apply_edit_script(&fs, &e), Err(Error::InvalidScript(_))));
    }

    #[test]
    fn spatial_add_into_motionless_and_back() {
        let fs = FineScript::new(vec![Snippet::Motionless]).unwrap();
        let e = AtomicEdit::SpatialAdd { p: 1, sentence: sen("the head nods."), j: 1 };
        let out = apply_edit_script(&fs, &e).unwrap();
        assert_eq!(out.snippets()[0].sentence_count(), 1);
        assert_eq!(apply_edit_script(&out, &e.invert()).unwrap(), fs);
    }

    #[test]
    fn spatial_delete_absent_part() {
        let e = AtomicEdit::SpatialDelete { p: 1, sentence: sen("the head nods."), j: 1 };
        assert!(matches!(apply_edit_script(&abc(), &e), Err(Error::BodyPartAbsent(_, 1))));
    }

    #[test]
    fn budget_is_enforced() {
        let fs = FineScript::new(vec![Snippet::Motionless; 18]).unwrap();
        let e = AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 3 };
        assert!(matches!(apply_edit_script(&fs, &e), Err(Error::SnippetBudgetExceeded { snippets: 21, .. })));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(
            AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 }.invert(),
            AtomicEdit::Delete { scope: Scope::Start, p: 1, n: 2, reverts: Reverts::Padding }
        );
        let x = sen("the left arm rises.");
        let inv = AtomicEdit::SpatialAdd { p: 3, sentence: x.clone(), j: 1 }.invert();
        assert_eq!(inv.kind(), EditKind::SpatialDelete);
        assert_eq!(inv.p(), 3);
        assert_eq!(inv.body_part(), Some(BodyPart::LeftArm));
        // the duplicate of a middle block sits right after the original
        assert_eq!(
            AtomicEdit::Repeat { scope: Scope::Middle, p: 2, n: 1 }.invert(),
            AtomicEdit::Delete { scope: Scope::Middle, p: 3, n: 1, reverts: Reverts::Repeating }
        );
    }

    #[test]
    fn every_forward_edit_round_trips_on_abc() {
        let fs = abc();
        let edits = [
            AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 },
            AtomicEdit::Pad { scope: Scope::Middle, p: 3, n: 1 },
            AtomicEdit::Pad { scope: Scope::End, p: 4, n: 3 },
            AtomicEdit::Repeat { scope: Scope::Start, p: 1, n: 3 },
            AtomicEdit::Repeat { scope: Scope::Middle, p: 2, n: 1 },
            AtomicEdit::Repeat { scope: Scope::End, p: 2, n: 2 },
        ];
        for e in edits {
            let out = apply_edit_script(&fs, &e).unwrap();
            let inv = e.invert();
            assert_eq!(apply_edit_script(&out, &inv).unwrap(), fs, "{e:?}");
            assert_eq!(inv.invert(), e);
        }
    }

    #[test]
    fn delete_checks_block_content() {
        let fs = abc();
        let e = AtomicEdit::Delete { scope: Scope::Start, p: 1, n: 1, reverts: Reverts::Padding };
        assert!(matches!(apply_edit_script(&fs, &e), Err(Error::InvalidScript(_))));
        let e = AtomicEdit::Delete { scope: Scope::End, p: 3, n: 1, reverts: Reverts::Repeating };
        assert!(matches!(apply_edit_script(&fs, &e), Err(Error::InvalidScript(_))));
    }

    #[test]
    fn retarget_end_edits() {
        let fs = abc();
        let e = AtomicEdit::Pad { scope: Scope::End, p: 9, n: 1 };
        assert_eq!(e.retarget(&fs), AtomicEdit::Pad { scope: Scope::End, p: 4, n: 1 });
    }
}
