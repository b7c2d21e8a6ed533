//! Seeded sampling of atomic edits and the sentence pool they draw from.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edit::{AtomicEdit, EditKind, Reverts, Scope};
use crate::error::{Error, Result};
use crate::layout::{BodyPart, MAX_SNIPPETS};
use crate::script::{FineScript, Sentence};

/// Body-part-movement sentences available for spatial adding, deduplicated
/// case-insensitively in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePool {
    sentences: Vec<Sentence>,
}

impl SentencePool {
    pub fn new<I: IntoIterator<Item = Sentence>>(items: I) -> SentencePool {
        let mut seen = BTreeSet::new();
        let sentences = items
            .into_iter()
            .filter(|s| seen.insert(s.text().to_lowercase()))
            .collect();
        SentencePool { sentences }
    }

    /// Parses `part<TAB>sentence` lines. Blank lines and lines starting with
    /// `#` are skipped.
    pub fn from_tsv(text: &str) -> Result<SentencePool> {
        let mut out = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (part, sentence) = line
                .split_once('\t')
                .ok_or_else(|| Error::InvalidSentence(alloc::format!("line {}: expected part<TAB>sentence", no + 1)))?;
            let part = BodyPart::from_name(part.trim())
                .ok_or_else(|| Error::InvalidSentence(alloc::format!("line {}: unknown part {part:?}", no + 1)))?;
            out.push(Sentence::tagged(sentence, part)?);
        }
        Ok(SentencePool::new(out))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(s.part().name());
            out.push('\t');
            out.push_str(s.text());
            out.push('\n');
        }
        out
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn by_part(&self, part: BodyPart) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter().filter(move |s| s.part() == part)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Relative sampling weights per edit kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpWeights(pub BTreeMap<EditKind, f64>);

impl Default for OpWeights {
    /// Proportional to the published per-group pair counts (padding 2613,
    /// repeating 1443, deleting 4056, spatial adding 810, spatial deleting
    /// 810), split evenly across start, middle and end.
    fn default() -> Self {
        let mut m = BTreeMap::new();
        for (kinds, total) in [
            ([EditKind::PadStart, EditKind::PadMiddle, EditKind::PadEnd], 2613.0),
            ([EditKind::RepeatStart, EditKind::RepeatMiddle, EditKind::RepeatEnd], 1443.0),
            ([EditKind::DeleteStart, EditKind::DeleteMiddle, EditKind::DeleteEnd], 4056.0),
        ] {
            for k in kinds {
                m.insert(k, total / 3.0);
            }
        }
        m.insert(EditKind::SpatialAdd, 810.0);
        m.insert(EditKind::SpatialDelete, 810.0);
        OpWeights(m)
    }
}

impl OpWeights {
    pub fn only(kinds: &[EditKind]) -> OpWeights {
        OpWeights(kinds.iter().map(|&k| (k, 1.0)).collect())
    }

    pub fn get(&self, kind: EditKind) -> f64 {
        self.0.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.values().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("op weights must be finite and non-negative".into()));
        }
        Ok(())
    }
}

fn spatial_add_slots<'a>(fs: &FineScript, pool: &'a SentencePool) -> Vec<(usize, Vec<&'a Sentence>)> {
    fs.snippets()
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let ok: Vec<&Sentence> = pool.sentences().iter().filter(|x| !s.has_part(x.part())).collect();
            (!ok.is_empty()).then_some((i + 1, ok))
        })
        .collect()
}

/// (p, j) of sentences whose body part is described only once in their snippet.
fn spatial_delete_slots(fs: &FineScript) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, s) in fs.snippets().iter().enumerate() {
        let sens = s.sentences();
        for (j, x) in sens.iter().enumerate() {
            if sens.iter().filter(|y| y.part() == x.part()).count() == 1 {
                out.push((i + 1, j + 1));
            }
        }
    }
    out
}

fn delete_candidates(fs: &FineScript, scope: Scope) -> Vec<AtomicEdit> {
    let k = fs.len();
    let mut out = Vec::new();
    for reverts in [Reverts::Padding, Reverts::Repeating] {
        for n in 1..k {
            let ps: Vec<usize> = match scope {
                Scope::Start => alloc::vec![1],
                Scope::Middle => (2..=k).collect(),
                Scope::End => alloc::vec![k + 1 - n],
            };
            for p in ps {
                let e = AtomicEdit::Delete { scope, p, n, reverts };
                if e.validate(fs).is_ok() {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// Whether `kind` has at least one valid parameterization on `fs`.
pub fn feasible(fs: &FineScript, kind: EditKind, pool: &SentencePool) -> bool {
    let k = fs.len();
    let room = k < MAX_SNIPPETS;
    match kind {
        EditKind::PadStart | EditKind::PadEnd | EditKind::RepeatStart | EditKind::RepeatEnd => room,
        EditKind::PadMiddle => room && k >= 2,
        EditKind::RepeatMiddle => room && k >= 3,
        EditKind::DeleteStart => !delete_candidates(fs, Scope::Start).is_empty(),
        EditKind::DeleteMiddle => !delete_candidates(fs, Scope::Middle).is_empty(),
        EditKind::DeleteEnd => !delete_candidates(fs, Scope::End).is_empty(),
        EditKind::SpatialAdd => !spatial_add_slots(fs, pool).is_empty(),
        EditKind::SpatialDelete => !spatial_delete_slots(fs).is_empty(),
    }
}

/// Samples parameters for one specific kind, uniformly over its valid range.
pub fn sample_kind<R: Rng + ?Sized>(fs: &FineScript, kind: EditKind, pool: &SentencePool, rng: &mut R) -> Result<AtomicEdit> {
    if !feasible(fs, kind, pool) {
        return Err(Error::NoValidEdit);
    }
    let k = fs.len();
    let budget = MAX_SNIPPETS - k.min(MAX_SNIPPETS);
    let e = match kind {
        EditKind::PadStart => AtomicEdit::Pad {
            scope: Scope::Start,
            p: 1,
            n: rng.random_range(1..=budget),
        },
        EditKind::PadMiddle => AtomicEdit::Pad {
            scope: Scope::Middle,
            p: rng.random_range(2..=k),
            n: rng.random_range(1..=budget),
        },
        EditKind::PadEnd => AtomicEdit::Pad {
            scope: Scope::End,
            p: k + 1,
            n: rng.random_range(1..=budget),
        },
        EditKind::RepeatStart => AtomicEdit::Repeat {
            scope: Scope::Start,
            p: 1,
            n: rng.random_range(1..=budget.min(k)),
        },
        EditKind::RepeatMiddle => {
            let p = rng.random_range(2..=k - 1);
            AtomicEdit::Repeat {
                scope: Scope::Middle,
                p,
                n: rng.random_range(1..=budget.min(k - p)),
            }
        }
        EditKind::RepeatEnd => {
            let n = rng.random_range(1..=budget.min(k));
            AtomicEdit::Repeat {
                scope: Scope::End,
                p: k - n + 1,
                n,
            }
        }
        EditKind::DeleteStart | EditKind::DeleteMiddle | EditKind::DeleteEnd => {
            let scope = kind.scope().unwrap_or(Scope::Middle);
            delete_candidates(fs, scope).choose(rng).cloned().ok_or(Error::NoValidEdit)?
        }
        EditKind::SpatialAdd => {
            let slots = spatial_add_slots(fs, pool);
            let (p, options) = slots.choose(rng).ok_or(Error::NoValidEdit)?;
            let sentence = (*options.choose(rng).ok_or(Error::NoValidEdit)?).clone();
            let n_sen = fs.snippets()[p - 1].sentence_count().max(1);
            AtomicEdit::SpatialAdd {
                p: *p,
                sentence,
                j: rng.random_range(1..=n_sen),
            }
        }
        EditKind::SpatialDelete => {
            let &(p, j) = spatial_delete_slots(fs).choose(rng).ok_or(Error::NoValidEdit)?;
            AtomicEdit::SpatialDelete {
                p,
                sentence: fs.snippets()[p - 1].sentences()[j - 1].clone(),
                j,
            }
        }
    };
    debug_assert!(e.validate(fs).is_ok(), "{e:?}");
    Ok(e)
}

fn pick_kind<R: Rng + ?Sized>(candidates: &[(EditKind, f64)], rng: &mut R) -> Result<EditKind> {
    if candidates.is_empty() {
        return Err(Error::NoValidEdit);
    }
    let dist = WeightedIndex::new(candidates.iter().map(|c| c.1)).map_err(|_| Error::NoValidEdit)?;
    Ok(candidates[dist.sample(rng)].0)
}

/// Draws a kind by weight among the kinds feasible on `fs`, then its
/// parameters. Deletions are drawn among blocks the script can give up.
pub fn sample_edit<R: Rng + ?Sized>(fs: &FineScript, weights: &OpWeights, pool: &SentencePool, rng: &mut R) -> Result<AtomicEdit> {
    weights.validate()?;
    let candidates: Vec<(EditKind, f64)> = EditKind::ALL
        .into_iter()
        .map(|k| (k, weights.get(k)))
        .filter(|&(k, w)| w > 0.0 && feasible(fs, k, pool))
        .collect();
    let kind = pick_kind(&candidates, rng)?;
    sample_kind(fs, kind, pool, rng)
}

/// How a candidate triplet is produced from a source record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Plan {
    /// Apply `edit` to the source.
    Direct { edit: AtomicEdit },
    /// Apply `forward` to the source, then publish the pair reversed with
    /// the inverse edit: deletions are built from insertions and additions.
    Swapped { forward: AtomicEdit },
}

impl Plan {
    /// The edit the published triplet carries.
    pub fn edit(&self) -> AtomicEdit {
        match self {
            Plan::Direct { edit } => edit.clone(),
            Plan::Swapped { forward } => forward.invert(),
        }
    }

    pub fn forward(&self) -> &AtomicEdit {
        match self {
            Plan::Direct { edit } => edit,
            Plan::Swapped { forward } => forward,
        }
    }
}

fn forward_kinds(kind: EditKind) -> [EditKind; 2] {
    match kind {
        EditKind::DeleteStart => [EditKind::PadStart, EditKind::RepeatStart],
        EditKind::DeleteMiddle => [EditKind::PadMiddle, EditKind::RepeatMiddle],
        EditKind::DeleteEnd => [EditKind::PadEnd, EditKind::RepeatEnd],
        _ => [EditKind::SpatialAdd, EditKind::SpatialAdd],
    }
}

/// Samples a triplet plan. Deletion kinds are realized by sampling the
/// matching padding/repeating (or spatial adding) edit and swapping the pair;
/// the choice between padding and repeating follows their relative weights.
pub fn sample_plan<R: Rng + ?Sized>(fs: &FineScript, weights: &OpWeights, pool: &SentencePool, rng: &mut R) -> Result<Plan> {
    weights.validate()?;
    let forward_options = |kind: EditKind| -> Vec<(EditKind, f64)> {
        let fk = forward_kinds(kind);
        let mut opts: Vec<(EditKind, f64)> = fk
            .iter()
            .map(|&f| (f, weights.get(f)))
            .filter(|&(f, _)| feasible(fs, f, pool))
            .collect();
        opts.dedup_by_key(|o| o.0);
        if opts.iter().all(|o| o.1 <= 0.0) {
            opts.iter_mut().for_each(|o| o.1 = 1.0);
        }
        opts
    };
    let candidates: Vec<(EditKind, f64)> = EditKind::ALL
        .into_iter()
        .map(|k| (k, weights.get(k)))
        .filter(|&(k, w)| {
            w > 0.0
                && if k.is_deletion() {
                    !forward_options(k).is_empty()
                } else {
                    feasible(fs, k, pool)
                }
        })
        .collect();
    let kind = pick_kind(&candidates, rng)?;
    if kind.is_deletion() {
        let fk = pick_kind(&forward_options(kind), rng)?;
        Ok(Plan::Swapped {
            forward: sample_kind(fs, fk, pool, rng)?,
        })
    } else {
        Ok(Plan::Direct {
            edit: sample_kind(fs, kind, pool, rng)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::apply_edit_script;
    use crate::script::Snippet;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool() -> SentencePool {
        SentencePool::from_tsv("left_arm\tthe left arm waves.\nhead\tthe head nods.\nhead\tThe head nods.\n").unwrap()
    }

    fn script(k: usize) -> FineScript {
        FineScript::new(
            (0..k)
                .map(|i| {
                    if i % 2 == 0 {
                        Snippet::Sentences(vec![Sentence::new("the right leg steps forward.").unwrap()])
                    } else {
                        Snippet::Sentences(vec![Sentence::new("the torso twists.").unwrap()])
                    }
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn pool_dedups_case_insensitively() {
        assert_eq!(pool().len(), 2);
        assert!(SentencePool::from_tsv("arm\tthe left arm waves.").is_err());
        assert!(SentencePool::from_tsv("torso\tthe left arm waves.").is_err());
    }

    #[test]
    fn full_script_rejects_insertions() {
        let fs = script(20);
        let w = OpWeights::only(&[EditKind::PadStart, EditKind::PadMiddle, EditKind::RepeatEnd]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_edit(&fs, &w, &pool(), &mut rng), Err(Error::NoValidEdit));
    }

    #[test]
    fn deterministic_under_seed() {
        let fs = script(5);
        let a = sample_edit(&fs, &OpWeights::default(), &pool(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_edit(&fs, &OpWeights::default(), &pool(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn every_sample_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=20 {
            let fs = script(k);
            for _ in 0..50 {
                match sample_plan(&fs, &OpWeights::default(), &pool(), &mut rng) {
                    Ok(plan) => {
                        let out = apply_edit_script(&fs, plan.forward()).unwrap();
                        if let Plan::Swapped { .. } = plan {
                            assert_eq!(apply_edit_script(&out, &plan.edit()).unwrap(), fs);
                        }
                    }
                    Err(e) => panic!("k = {k}: {e}"),
                }
            }
        }
    }

    #[test]
    fn direct_deletes_on_padded_script() {
        let fs = script(3);
        let padded = apply_edit_script(&fs, &AtomicEdit::Pad { scope: Scope::Middle, p: 2, n: 2 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = sample_kind(&padded, EditKind::DeleteMiddle, &pool(), &mut rng).unwrap();
        assert!(apply_edit_script(&padded, &e).is_ok());
        assert_eq!(sample_kind(&fs, EditKind::DeleteStart, &pool(), &mut rng), Err(Error::NoValidEdit));
    }

    #[test]
    fn swapped_plans_for_deletions() {
        let fs = script(4);
        let w = OpWeights::only(&[EditKind::DeleteEnd]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let plan = sample_plan(&fs, &w, &pool(), &mut rng).unwrap();
            assert!(matches!(plan, Plan::Swapped { .. }));
            assert_eq!(plan.edit().kind(), EditKind::DeleteEnd);
        }
    }
}
