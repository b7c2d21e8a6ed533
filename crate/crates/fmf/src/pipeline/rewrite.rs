//! Paraphrases for basic instructions.

use std::path::Path;

use fmf_core::rewrite::{rewrite_complex, Rewriter};
use rayon::prelude::*;

use super::{keyed_u64, Context};
use crate::error::Result;
use crate::io;
use crate::record::{EditInfo, EditTriplet};

pub fn rewrite_triplet<R: Rewriter + ?Sized>(rewriter: &R, t: &mut EditTriplet, count: usize, seed: u64) -> Result<()> {
    let seed = keyed_u64(seed, &format!("rewrite:{}", t.id));
    t.instructions_rewritten = match &t.edit {
        EditInfo::Atomic { edit } => rewriter.rewrite(&t.instruction_basic, edit.kind(), count, seed)?,
        EditInfo::Complex(c) => {
            let steps: Vec<(String, fmf_core::EditKind)> = c.cot.iter().map(|s| (s.instruction.clone(), s.edit.kind())).collect();
            let mut out: Vec<String> = Vec::with_capacity(count);
            for v in 0..count as u64 {
                let text = rewrite_complex(rewriter, &steps, seed.wrapping_add(v.wrapping_mul(0x9e37_79b9_7f4a_7c15)))?;
                if !out.contains(&text) {
                    out.push(text);
                }
            }
            out
        }
    };
    Ok(())
}

/// Rewrites every triplet in `input`; refs are re-based to `out`'s directory.
pub fn rewrite_file(ctx: &Context, input: &Path, out: &Path) -> Result<Vec<EditTriplet>> {
    let base = io::dir_of(input);
    let out_dir = io::dir_of(out);
    let triplets: Vec<EditTriplet> = io::read_jsonl(input)?;
    let rewritten = triplets
        .into_par_iter()
        .map(|mut t| {
            rewrite_triplet(ctx.rewriter.as_ref(), &mut t, ctx.cfg.rewrite_count, ctx.cfg.seed)?;
            t.map_refs(|r| io::relative_ref(&out_dir, &io::resolve_ref(&base, r)))?;
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    io::write_jsonl(out, &rewritten)?;
    Ok(rewritten)
}
