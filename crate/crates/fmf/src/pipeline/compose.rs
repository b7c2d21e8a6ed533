//! Complex triplets from accepted siblings that share a source motion.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use fmf_core::compose::{compose_chain, replay_step, sample_chains, AtomicTriplet};
use fmf_core::Motion;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::check_triplet;
use super::{keyed_rng, Context, MotionCache};
use crate::error::Result;
use crate::io;
use crate::record::{Annotation, ComplexInfo, EditInfo, EditTriplet, Provenance};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub groups: usize,
    /// Groups with a single accepted triplet.
    pub insufficient_siblings: usize,
    pub chains_sampled: usize,
    pub emitted: usize,
    pub invalid_chains: usize,
    pub replay_mismatches: usize,
    pub qc_rejected: usize,
}

/// Groups accepted atomic triplets by source id, in id order.
pub fn group_by_source(triplets: &[EditTriplet]) -> BTreeMap<String, Vec<&EditTriplet>> {
    let mut groups: BTreeMap<String, Vec<&EditTriplet>> = BTreeMap::new();
    for t in triplets.iter().filter(|t| t.atomic_edit().is_some() && t.qc_accepted()) {
        groups.entry(t.source_id.clone()).or_default().push(t);
    }
    for g in groups.values_mut() {
        g.sort_by(|a, b| a.id.cmp(&b.id));
    }
    groups
}

fn as_atomic(t: &EditTriplet) -> AtomicTriplet {
    AtomicTriplet {
        id: t.id.clone(),
        source_id: t.source_id.clone(),
        source_script: t.source_script.clone(),
        edit: t.atomic_edit().expect("atomic").clone(),
        accepted: t.qc_accepted(),
    }
}

struct GroupOutput {
    triplets: Vec<EditTriplet>,
    report: ComposeReport,
}

pub fn compose_file(ctx: &Context, input: &Path, out: &Path) -> Result<(Vec<EditTriplet>, ComposeReport)> {
    let base = io::dir_of(input);
    let out_dir = io::dir_of(out);
    let triplets: Vec<EditTriplet> = io::read_jsonl(input)?;
    let groups = group_by_source(&triplets);
    let cache = MotionCache::default();
    let outputs = groups
        .par_iter()
        .map(|(source_id, members)| compose_group(ctx, source_id, members, &base, &out_dir, &cache))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ComposeReport {
        groups: groups.len(),
        ..ComposeReport::default()
    };
    let mut all = Vec::new();
    for o in outputs {
        report.insufficient_siblings += o.report.insufficient_siblings;
        report.chains_sampled += o.report.chains_sampled;
        report.invalid_chains += o.report.invalid_chains;
        report.replay_mismatches += o.report.replay_mismatches;
        report.qc_rejected += o.report.qc_rejected;
        all.extend(o.triplets);
    }
    all.sort_by(|a, b| a.id.cmp(&b.id));
    report.emitted = all.len();
    io::write_jsonl(out, &all)?;
    Ok((all, report))
}

fn compose_group(
    ctx: &Context,
    source_id: &str,
    members: &[&EditTriplet],
    base: &Path,
    out_dir: &Path,
    cache: &MotionCache,
) -> Result<GroupOutput> {
    let mut out = GroupOutput {
        triplets: Vec::new(),
        report: ComposeReport::default(),
    };
    if members.len() < 2 {
        out.report.insufficient_siblings = 1;
        return Ok(out);
    }
    let mut rng = keyed_rng(ctx.cfg.seed, &format!("compose:{source_id}"));
    let chains = sample_chains(members.len(), &ctx.cfg.chain_lengths, ctx.cfg.chain_cap, &mut rng);
    out.report.chains_sampled = chains.len();
    let atomics: Vec<AtomicTriplet> = members.iter().map(|t| as_atomic(t)).collect();
    let load = |r: &str| cache.get(&io::resolve_ref(base, r));
    let oracle_backed = members.iter().all(|t| t.provenance.generator == "oracle");

    for (c, chain) in chains.iter().enumerate() {
        let picked: Vec<&AtomicTriplet> = chain.iter().map(|&i| &atomics[i]).collect();
        let fps = f64::from(load(&members[0].source_motion)?.fps());
        let complex = match compose_chain(&picked, &ctx.templates, fps) {
            Ok(cx) => cx,
            Err(e) => {
                tracing::debug!("{source_id} chain {chain:?}: {e}");
                out.report.invalid_chains += 1;
                continue;
            }
        };
        let first = &members[chain[0]];
        let second = &members[chain[1]];
        let id = format!("{source_id}-c{c}");

        // States: the first target, the shared source, the second target,
        // then oracle steps for any further siblings.
        let source = load(&first.source_motion)?;
        let mut states: Vec<Arc<Motion>> = vec![load(&first.target_motion)?, source.clone(), load(&second.target_motion)?];
        let mut refs: Vec<(String, String)> = vec![
            (first.target_id.clone(), io::relative_ref(out_dir, &io::resolve_ref(base, &first.target_motion))?),
            (first.source_id.clone(), io::relative_ref(out_dir, &io::resolve_ref(base, &first.source_motion))?),
            (second.target_id.clone(), io::relative_ref(out_dir, &io::resolve_ref(base, &second.target_motion))?),
        ];
        if oracle_backed {
            let s1 = replay_step(&states[0], &complex.steps[0], Some(&source))?;
            let s2 = replay_step(&s1, &complex.steps[1], None)?;
            if s1 != *states[1] || s2 != *states[2] {
                out.report.replay_mismatches += 1;
                continue;
            }
        }
        let mut failed = false;
        for (i, step) in complex.steps.iter().enumerate().skip(2) {
            match replay_step(&states[i], step, None) {
                Ok(m) => {
                    let sid = format!("{id}-s{}", i + 1);
                    let file = format!("motions/{sid}.json");
                    io::write_motion(&out_dir.join(&file), &m)?;
                    states.push(Arc::new(m));
                    refs.push((sid, file));
                }
                Err(e) => {
                    tracing::debug!("{id}: step {}: {e}", i + 1);
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            out.report.invalid_chains += 1;
            continue;
        }

        let mut info = ComplexInfo::from(&complex);
        for (step, (mid, mref)) in info.cot.iter_mut().zip(refs.iter().skip(1)) {
            step.motion_id = mid.clone();
            step.motion = mref.clone();
        }
        let (target_id, target_motion) = refs.last().cloned().expect("states");
        let mut t = EditTriplet {
            id: id.clone(),
            caption: first.caption.clone(),
            source_id: refs[0].0.clone(),
            source_motion: refs[0].1.clone(),
            source_script: complex.scripts[0].clone(),
            target_id,
            target_motion,
            target_script: complex.scripts.last().expect("scripts").clone(),
            edit: EditInfo::Complex(info),
            instruction_basic: complex.instruction.clone(),
            instructions_rewritten: Vec::new(),
            qc: None,
            annotation: Annotation::Pending,
            split: first.split,
            provenance: Provenance {
                generator: first.provenance.generator.clone(),
                seed: ctx.cfg.seed,
                mode: "chain".into(),
            },
        };
        let qc = check_triplet(&ctx.filter, &t, out_dir, cache)?;
        if !qc.accepted {
            out.report.qc_rejected += 1;
            continue;
        }
        t.qc = Some(qc);
        out.triplets.push(t);
    }
    Ok(out)
}
