//! Complex edits built from sibling triplets that share a source motion.
//!
//! Given siblings `S -e1-> T1` and `S -e2-> T2`, the chain starts at `T1`,
//! steps back to `S` with `invert(e1)`, then forward with `e2`. Further
//! siblings extend the chain with their forward edits, re-anchored to the
//! running script.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edit::{apply_edit_script, AtomicEdit};
use crate::error::{Error, Result};
use crate::frames::{apply_spatial_frames, apply_temporal_frames, spatial_add_oracle};
use crate::instruction::TemplateSet;
use crate::motion::Motion;
use crate::script::FineScript;

/// Chain lengths sampled by default. The published step-count distribution
/// has no numeric table, so this is a free setting.
pub const DEFAULT_CHAIN_LENGTHS: [usize; 2] = [2, 3];
pub const MIN_CHAIN: usize = 2;
pub const MAX_CHAIN: usize = 6;

/// The parts of an atomic triplet composition needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicTriplet {
    pub id: String,
    pub source_id: String,
    pub source_script: FineScript,
    pub edit: AtomicEdit,
    /// Passed automatic quality control.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexEdit {
    /// Triplet ids in chain order.
    pub members: Vec<String>,
    pub steps: Vec<AtomicEdit>,
    /// States before and after every step; `scripts.len() == steps.len() + 1`.
    pub scripts: Vec<FineScript>,
    pub step_instructions: Vec<String>,
    /// Step instructions joined in order.
    pub instruction: String,
}

/// Steps and intermediate scripts for a chain over forward edits that all
/// start from `src`.
pub fn plan_chain(src: &FineScript, edits: &[AtomicEdit]) -> Result<(Vec<AtomicEdit>, Vec<FineScript>)> {
    if edits.len() < MIN_CHAIN || edits.len() > MAX_CHAIN {
        return Err(Error::InvalidArgument(alloc::format!(
            "chain length {} outside {MIN_CHAIN}..={MAX_CHAIN}",
            edits.len()
        )));
    }
    let first = apply_edit_script(src, &edits[0])?;
    let mut steps = alloc::vec![edits[0].invert()];
    let mut scripts = alloc::vec![first.clone(), apply_edit_script(&first, &steps[0])?];
    if scripts[1] != *src {
        return Err(Error::InvalidScript("inverse step does not return to the source".into()));
    }
    for e in &edits[1..] {
        let cur = scripts.last().expect("non-empty");
        let step = e.retarget(cur);
        let next = apply_edit_script(cur, &step)?;
        steps.push(step);
        scripts.push(next);
    }
    Ok((steps, scripts))
}

/// Composes siblings in the given order.
pub fn compose_chain(triplets: &[&AtomicTriplet], templates: &TemplateSet, fps: f64) -> Result<ComplexEdit> {
    let Some(head) = triplets.first() else {
        return Err(Error::InvalidArgument("empty chain".into()));
    };
    for t in triplets {
        if t.source_id != head.source_id || t.source_script != head.source_script {
            return Err(Error::SourceMismatch(t.source_id.clone(), head.source_id.clone()));
        }
        if !t.accepted {
            return Err(Error::UnvalidatedInput(t.id.clone()));
        }
    }
    let edits: Vec<AtomicEdit> = triplets.iter().map(|t| t.edit.clone()).collect();
    let (steps, scripts) = plan_chain(&head.source_script, &edits)?;
    let step_instructions: Vec<String> = steps.iter().map(|s| templates.render(s, fps)).collect();
    Ok(ComplexEdit {
        members: triplets.iter().map(|t| t.id.clone()).collect(),
        instruction: step_instructions.join(" "),
        steps,
        scripts,
        step_instructions,
    })
}

/// The two-triplet case.
pub fn compose_complex(t1: &AtomicTriplet, t2: &AtomicTriplet, templates: &TemplateSet, fps: f64) -> Result<ComplexEdit> {
    compose_chain(&[t1, t2], templates, fps)
}

/// Frame-level application of one step. Spatial deletion needs the motion
/// holding the restored part (for a chain's first step, the shared source).
pub fn replay_step(m: &Motion, step: &AtomicEdit, donor: Option<&Motion>) -> Result<Motion> {
    match step {
        AtomicEdit::SpatialAdd { p, sentence, .. } => spatial_add_oracle(m, *p, sentence),
        AtomicEdit::SpatialDelete { .. } => {
            let donor = donor.ok_or_else(|| Error::InvalidArgument("spatial deletion needs a donor motion".into()))?;
            apply_spatial_frames(m, step, donor)
        }
        _ => apply_temporal_frames(m, step),
    }
}

/// Replays a chain from its first motion. `source` is the shared source,
/// used as donor for a spatial deletion in the first step.
pub fn replay_chain(first: &Motion, steps: &[AtomicEdit], source: &Motion) -> Result<Vec<Motion>> {
    let mut states = alloc::vec![first.clone()];
    for (i, step) in steps.iter().enumerate() {
        let donor = (i == 0).then_some(source);
        let next = replay_step(states.last().expect("non-empty"), step, donor)?;
        states.push(next);
    }
    Ok(states)
}

fn permutations_count(m: usize, len: usize) -> u128 {
    (0..len).map(|i| (m - i) as u128).product()
}

/// All ordered selections of `len` distinct indices from `0..m`, in
/// lexicographic order.
pub fn ordered_chains(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if len == 0 || len > m {
        return out;
    }
    let mut cur = Vec::with_capacity(len);
    let mut used = alloc::vec![false; m];
    fn rec(m: usize, len: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in 0..m {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(m, len, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(m, len, &mut cur, &mut used, &mut out);
    out
}

const ENUMERATION_LIMIT: u128 = 4096;

/// Up to `cap` distinct ordered chains per length, drawn without
/// replacement. Small groups are enumerated and shuffled; large ones are
/// sampled directly.
pub fn sample_chains<R: Rng + ?Sized>(m: usize, lengths: &[usize], cap: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for &len in lengths {
        if !(MIN_CHAIN..=MAX_CHAIN).contains(&len) || len > m {
            continue;
        }
        let total = permutations_count(m, len);
        if total <= ENUMERATION_LIMIT {
            let mut all = ordered_chains(m, len);
            all.shuffle(rng);
            all.truncate(cap);
            out.extend(all);
        } else {
            let want = (cap as u128).min(total / 2) as usize;
            let mut seen = BTreeSet::new();
            let mut idx: Vec<usize> = (0..m).collect();
            while seen.len() < want {
                let chain = idx.partial_shuffle(rng, len).0.to_vec();
                if seen.insert(chain.clone()) {
                    out.push(chain);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edit::Scope;
    use crate::instruction::render_instruction;
    use crate::script::{Sentence, Snippet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn src() -> FineScript {
        FineScript::new(alloc::vec![
            Snippet::Sentences(alloc::vec![Sentence::new("the right leg kicks.").unwrap()]),
            Snippet::Sentences(alloc::vec![Sentence::new("the torso bends.").unwrap()]),
            Snippet::Motionless,
        ])
        .unwrap()
    }

    fn triplet(id: &str, edit: AtomicEdit) -> AtomicTriplet {
        AtomicTriplet { id: id.into(), source_id: "s".into(), source_script: src(), edit, accepted: true }
    }

    #[test]
    fn two_step_chain_matches_concatenation() {
        let t1 = triplet("a", AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 });
        let add = AtomicEdit::SpatialAdd { p: 1, sentence: Sentence::new("the left arm waves.").unwrap(), j: 2 };
        let t2 = triplet("b", add.clone());
        let c = compose_complex(&t1, &t2, &TemplateSet::default(), 20.0).unwrap();
        assert_eq!(c.step_instructions[0], "Delete the first 1s of motion.");
        assert_eq!(c.step_instructions[1], render_instruction(&add, 20.0));
        assert_eq!(c.instruction, alloc::format!("{} {}", c.step_instructions[0], c.step_instructions[1]));
        assert_eq!(c.scripts[1], src());
    }

    #[test]
    fn self_chain_returns_to_start() {
        let t = triplet("a", AtomicEdit::Repeat { scope: Scope::Middle, p: 2, n: 1 });
        let c = compose_complex(&t, &t, &TemplateSet::default(), 20.0).unwrap();
        assert_eq!(c.scripts[0], c.scripts[2]);
    }

    #[test]
    fn guards() {
        let t1 = triplet("a", AtomicEdit::Pad { scope: Scope::End, p: 4, n: 1 });
        let mut t2 = triplet("b", AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 1 });
        t2.source_id = "other".into();
        assert!(matches!(compose_complex(&t1, &t2, &TemplateSet::default(), 20.0), Err(Error::SourceMismatch(..))));
        t2.source_id = "s".into();
        t2.accepted = false;
        assert!(matches!(compose_complex(&t1, &t2, &TemplateSet::default(), 20.0), Err(Error::UnvalidatedInput(_))));
    }

    #[test]
    fn end_scoped_steps_follow_the_running_length() {
        let edits = [
            AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 1 },
            AtomicEdit::Pad { scope: Scope::Start, p: 1, n: 2 },
            AtomicEdit::Pad { scope: Scope::End, p: 4, n: 1 },
        ];
        let (steps, scripts) = plan_chain(&src(), &edits).unwrap();
        assert_eq!(steps[2], AtomicEdit::Pad { scope: Scope::End, p: 6, n: 1 });
        assert_eq!(scripts.last().unwrap().len(), 6);
    }

    #[test]
    fn chain_enumeration() {
        assert_eq!(ordered_chains(3, 2).len(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut got = sample_chains(3, &[2], 100, &mut rng);
        got.sort();
        assert_eq!(got, ordered_chains(3, 2));
        assert!(sample_chains(1, &[2], 10, &mut rng).is_empty());
        let big = sample_chains(30, &[6], 50, &mut rng);
        assert_eq!(big.len(), 50);
        assert_eq!(big.iter().collect::<BTreeSet<_>>().len(), 50);
    }
}
