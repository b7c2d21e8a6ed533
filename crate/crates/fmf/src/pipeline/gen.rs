//! Candidate generation: sample edits per corpus record, derive target
//! scripts and motions, render basic instructions.

use std::path::Path;

use fmf_core::edit::apply_edit_script;
use fmf_core::sample::{sample_plan, Plan};
use fmf_core::{AtomicEdit, Error as CoreError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{keyed_rng, keyed_u64, Context};
use crate::backend::GenerateRequest;
use crate::error::{FmfError, Result};
use crate::io;
use crate::record::{Annotation, CorpusRecord, EditInfo, EditTriplet, Provenance, Split};

/// Attempts at drawing an edit that differs from the record's earlier ones.
const DISTINCT_TRIES: usize = 8;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub record: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenReport {
    pub records: usize,
    pub candidates: usize,
    pub generator_failures: usize,
    pub skipped: Vec<Skipped>,
}

struct RecordOutput {
    triplets: Vec<EditTriplet>,
    skipped: Vec<Skipped>,
    failures: usize,
}

pub fn generate(ctx: &Context, corpus_path: &Path, out_path: &Path) -> Result<(Vec<EditTriplet>, GenReport)> {
    let corpus: Vec<CorpusRecord> = io::read_jsonl(corpus_path)?;
    let corpus_dir = io::dir_of(corpus_path);
    let out_dir = io::dir_of(out_path);
    let mut splits = Vec::with_capacity(corpus.len());
    for r in &corpus {
        splits.push(Split::parse(&r.split)?);
        if fmf_core::vocab::contains_special(&r.caption) {
            return Err(FmfError::Validation(format!("record {}: caption contains a special token", r.id)));
        }
    }
    let outputs = corpus
        .par_iter()
        .zip(&splits)
        .map(|(r, &split)| one_record(ctx, r, split, &corpus_dir, &out_dir))
        .collect::<Result<Vec<_>>>()?;

    let mut report = GenReport {
        records: corpus.len(),
        ..GenReport::default()
    };
    let mut triplets = Vec::new();
    for o in outputs {
        report.generator_failures += o.failures;
        report.skipped.extend(o.skipped);
        triplets.extend(o.triplets);
    }
    triplets.sort_by(|a, b| a.id.cmp(&b.id));
    report.candidates = triplets.len();
    io::write_jsonl(out_path, &triplets)?;
    Ok((triplets, report))
}

fn one_record(ctx: &Context, r: &CorpusRecord, split: Split, corpus_dir: &Path, out_dir: &Path) -> Result<RecordOutput> {
    let mut out = RecordOutput {
        triplets: Vec::new(),
        skipped: Vec::new(),
        failures: 0,
    };
    let skip = |reason: String| Skipped {
        record: r.id.clone(),
        reason,
    };
    let src_path = io::resolve_ref(corpus_dir, &r.motion_file);
    let src = io::read_motion(&src_path)?;
    let fs = &r.fine_script;
    if src.snippet_count() != fs.len() {
        out.skipped.push(skip(format!(
            "motion has {} snippets but the script has {}",
            src.snippet_count(),
            fs.len()
        )));
        return Ok(out);
    }
    let src_ref = io::relative_ref(out_dir, &src_path)?;
    let mut rng = keyed_rng(ctx.cfg.seed, &format!("gen:{}", r.id));
    let mut seen: Vec<AtomicEdit> = Vec::new();
    for j in 0..ctx.cfg.edits_per_record {
        let mut plan = None;
        for _ in 0..DISTINCT_TRIES {
            match sample_plan(fs, &ctx.cfg.weights, &ctx.pool, &mut rng) {
                Ok(p) if seen.contains(p.forward()) => plan = Some(Err(p)),
                Ok(p) => {
                    plan = Some(Ok(p));
                    break;
                }
                Err(CoreError::NoValidEdit) => break,
                Err(e) => return Err(e.into()),
            }
        }
        let plan = match plan {
            Some(Ok(p)) => p,
            Some(Err(_)) => {
                out.skipped.push(skip(format!("edit {j}: no edit distinct from earlier ones")));
                continue;
            }
            None => {
                out.skipped.push(skip(format!("edit {j}: {}", CoreError::NoValidEdit)));
                continue;
            }
        };
        seen.push(plan.forward().clone());

        let id = format!("{}-a{j}", r.id);
        let fwd_script = apply_edit_script(fs, plan.forward())?;
        let seed = keyed_u64(ctx.cfg.seed, &id);
        let generated = ctx.generator.generate(&GenerateRequest {
            caption: &r.caption,
            script: &fwd_script,
            source: &src,
            edit: plan.forward(),
            seed,
        });
        let fwd_motion = match generated {
            Ok(m) => m,
            Err(e @ FmfError::Backend(_)) => {
                tracing::warn!("{id}: {e}");
                out.failures += 1;
                out.skipped.push(skip(format!("edit {j}: {e}")));
                continue;
            }
            Err(e) => return Err(e),
        };
        let edit = plan.edit();
        let fps = f64::from(src.fps());
        let (mode, source_id, source_motion, source_script, target_id, target_motion, target_script) = match &plan {
            Plan::Direct { .. } => {
                let file = format!("motions/{id}-tgt.json");
                io::write_motion(&out_dir.join(&file), &fwd_motion)?;
                ("direct", r.id.clone(), src_ref.clone(), fs.clone(), format!("{id}-tgt"), file, fwd_script)
            }
            Plan::Swapped { .. } => {
                let file = format!("motions/{id}-src.json");
                io::write_motion(&out_dir.join(&file), &fwd_motion)?;
                ("swapped", format!("{id}-src"), file, fwd_script, r.id.clone(), src_ref.clone(), fs.clone())
            }
        };
        out.triplets.push(EditTriplet {
            instruction_basic: ctx.templates.render(&edit, fps),
            id,
            caption: r.caption.clone(),
            source_id,
            source_motion,
            source_script,
            target_id,
            target_motion,
            target_script,
            edit: EditInfo::Atomic { edit },
            instructions_rewritten: Vec::new(),
            qc: None,
            annotation: Annotation::Pending,
            split,
            provenance: Provenance {
                generator: ctx.generator.id().to_string(),
                seed,
                mode: mode.into(),
            },
        });
    }
    Ok(out)
}
