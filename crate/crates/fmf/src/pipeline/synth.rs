//! Synthetic corpus: random scripts over the sentence pool, rendered into
//! motions by the deterministic synthetic generator.

use std::path::Path;

use fmf_core::sample::SentencePool;
use fmf_core::synth::{random_script, synth_motion};
use fmf_core::FineScript;
use rand::Rng;
use rayon::prelude::*;

use super::{keyed_rng, keyed_u64};
use crate::error::Result;
use crate::io;
use crate::record::{CorpusRecord, Split};

pub struct SynthOptions {
    pub records: usize,
    pub seed: u64,
    pub min_snippets: usize,
    pub max_snippets: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            records: 100,
            seed: 0,
            min_snippets: 2,
            max_snippets: 6,
        }
    }
}

fn caption(fs: &FineScript) -> String {
    let mut parts: Vec<&str> = fs.sentences().map(|s| s.part().display_name()).collect();
    parts.sort_unstable();
    parts.dedup();
    if parts.is_empty() {
        "a person stands still.".into()
    } else {
        format!("a person moves the {}.", parts.join(", "))
    }
}

/// Writes `corpus.jsonl` style records to `out` and motions next to it under
/// `motions/`. Splits are drawn 80/10/10.
pub fn synth_corpus(out: &Path, pool: &SentencePool, opts: &SynthOptions) -> Result<Vec<CorpusRecord>> {
    let dir = io::dir_of(out);
    let width = opts.records.saturating_sub(1).to_string().len().max(4);
    let records = (0..opts.records)
        .into_par_iter()
        .map(|i| {
            let id = format!("m{i:0width$}");
            let mut rng = keyed_rng(opts.seed, &format!("synth:{id}"));
            let fs = random_script(&mut rng, pool, opts.min_snippets, opts.max_snippets)?;
            let split = match rng.random_range(0..10) {
                0 => Split::Val,
                1 => Split::Test,
                _ => Split::Train,
            };
            let m = synth_motion(&fs, keyed_u64(opts.seed, &id))?;
            let file = format!("motions/{id}.json");
            io::write_motion(&dir.join(&file), &m)?;
            Ok(CorpusRecord {
                id,
                caption: caption(&fs),
                fine_script: fs,
                motion_file: file,
                split: split.name().into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    io::write_jsonl(out, &records)?;
    Ok(records)
}
