//! Retrieval evaluation of generated motions against their targets.

use std::path::Path;

use fmf_core::embed::{l2, SnippetEncoder, StatEncoder};
use fmf_core::metrics::{aligned_snippets, retrieval_eval, snippet_eval_pooled, RetrievalMode, RetrievalReport, SnippetEval};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FmfError, Result};
use crate::io;

/// One line of an evaluation file; paths are relative to the file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub id: String,
    pub generated: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub sequence: RetrievalReport,
    pub snippet: SnippetEval,
}

/// Mean of snippet embeddings, L2-normalized.
fn pooled(snippets: &[Vec<f64>]) -> Vec<f64> {
    let dim = snippets[0].len();
    let mut v = vec![0.0; dim];
    for s in snippets {
        v.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let n = l2(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

pub fn evaluate<E: SnippetEncoder>(input: &Path, gallery_size: usize, enc: &E) -> Result<EvalReport> {
    let base = io::dir_of(input);
    let pairs: Vec<EvalPair> = io::read_jsonl(input)?;
    if pairs.is_empty() {
        return Err(FmfError::Validation(format!("{}: no pairs", input.display())));
    }
    let embedded = pairs
        .par_iter()
        .map(|p| {
            let g = io::read_motion(&io::resolve_ref(&base, &p.generated))?;
            let t = io::read_motion(&io::resolve_ref(&base, &p.target))?;
            Ok(aligned_snippets(&g, &t, enc)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let seq_g: Vec<Vec<f64>> = embedded.iter().map(|(g, _)| pooled(g)).collect();
    let seq_t: Vec<Vec<f64>> = embedded.iter().map(|(_, t)| pooled(t)).collect();
    let snip_g: Vec<Vec<f64>> = embedded.iter().flat_map(|(g, _)| g.clone()).collect();
    let snip_t: Vec<Vec<f64>> = embedded.iter().flat_map(|(_, t)| t.clone()).collect();
    let seq_gallery = gallery_size.min(seq_g.len());
    let snip_gallery = gallery_size.min(snip_g.len());
    Ok(EvalReport {
        pairs: pairs.len(),
        sequence: retrieval_eval(&seq_g, &seq_t, seq_gallery, RetrievalMode::Sequence)?,
        snippet: snippet_eval_pooled(&snip_g, &snip_t, snip_gallery)?,
    })
}

pub fn evaluate_default(input: &Path, gallery_size: usize) -> Result<EvalReport> {
    evaluate(input, gallery_size, &StatEncoder)
}
