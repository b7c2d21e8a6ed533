#![allow(dead_code)]

use std::path::{Path, PathBuf};

use fmf::config::Config;
use fmf::pipeline::{self, Context};
use fmf_core::synth::default_pool;

pub struct Run {
    pub corpus: PathBuf,
    pub candidates: PathBuf,
    pub filtered: PathBuf,
    pub complex: PathBuf,
    pub export: PathBuf,
}

pub fn synth(dir: &Path, records: usize, seed: u64, min: usize, max: usize) -> PathBuf {
    let corpus = dir.join("corpus").join("corpus.jsonl");
    let opts = pipeline::synth::SynthOptions {
        records,
        seed,
        min_snippets: min,
        max_snippets: max,
    };
    pipeline::synth::synth_corpus(&corpus, &default_pool(), &opts).unwrap();
    corpus
}

/// gen -> filter -> compose -> export under `dir`.
pub fn full_run(dir: &Path, cfg: Config, records: usize) -> Run {
    let corpus = synth(dir, records, cfg.seed, 2, 6);
    let ctx = Context::new(cfg).unwrap();
    let candidates = dir.join("gen").join("candidates.jsonl");
    pipeline::gen::generate(&ctx, &corpus, &candidates).unwrap();
    let filtered = dir.join("filtered").join("accepted.jsonl");
    pipeline::filter::filter_file(&ctx.filter, &candidates, &filtered, None, None).unwrap();
    let complex = dir.join("complex").join("complex.jsonl");
    pipeline::compose::compose_file(&ctx, &filtered, &complex).unwrap();
    let export = dir.join("dataset");
    pipeline::export::export(
        &[filtered.clone(), complex.clone()],
        &export,
        pipeline::export::ExportOptions { accept_pending: true },
    )
    .unwrap();
    Run {
        corpus,
        candidates,
        filtered,
        complex,
        export,
    }
}

/// Every file under `dir` with its bytes, by relative path.
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
