//! Pipeline stages. Each stage reads JSONL records, works per record in
//! parallel, and writes its output sorted by id so runs with the same seed
//! are byte-identical.

pub mod compose;
pub mod eval;
pub mod export;
pub mod filter;
pub mod gen;
pub mod rewrite;
pub mod stats;
pub mod synth;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use fmf_core::instruction::TemplateSet;
use fmf_core::qc::Filter;
use fmf_core::rewrite::{Rewriter, TemplatePoolRewriter};
use fmf_core::sample::SentencePool;
use fmf_core::synth::default_pool;
use fmf_core::Motion;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::backend::{FallbackRewriter, Generator, HttpGenerator, HttpRewriter, OracleGenerator};
use crate::config::{Config, GeneratorBackend, RewriterBackend};
use crate::error::Result;
use crate::io;

/// Generator seeded from a run seed and a stable key such as a record id.
pub fn keyed_rng(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(keyed_seed(seed, key))
}

fn keyed_seed(seed: u64, key: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    h.finalize().into()
}

pub fn keyed_u64(seed: u64, key: &str) -> u64 {
    let s = keyed_seed(seed, key);
    u64::from_le_bytes(s[..8].try_into().expect("8 bytes"))
}

/// Everything a stage needs, resolved from the config once.
pub struct Context {
    pub cfg: Config,
    pub templates: TemplateSet,
    pub pool: SentencePool,
    pub filter: Filter,
    pub generator: Box<dyn Generator>,
    pub rewriter: Box<dyn Rewriter + Send + Sync>,
}

impl Context {
    pub fn new(cfg: Config) -> Result<Context> {
        let templates = match &cfg.templates_dir {
            Some(d) => io::read_templates(d)?,
            None => TemplateSet::default(),
        };
        let pool = match &cfg.sentences_file {
            Some(p) => io::read_sentence_pool(p)?,
            None => default_pool(),
        };
        let generator: Box<dyn Generator> = match cfg.generator {
            GeneratorBackend::Oracle => Box::new(OracleGenerator),
            GeneratorBackend::Http => Box::new(HttpGenerator::new(
                cfg.generator_url.as_deref().unwrap_or_default(),
                cfg.generator_timeout,
            )),
        };
        let pool_rewriter = TemplatePoolRewriter::new(templates.clone());
        let rewriter: Box<dyn Rewriter + Send + Sync> = match cfg.rewriter {
            RewriterBackend::Pool => Box::new(pool_rewriter),
            RewriterBackend::Http => Box::new(FallbackRewriter {
                primary: HttpRewriter::new(cfg.rewriter_url.as_deref().unwrap_or_default(), cfg.rewriter_timeout),
                fallback: pool_rewriter,
            }),
        };
        Ok(Context {
            filter: Filter::with_config(cfg.filter),
            cfg,
            templates,
            pool,
            generator,
            rewriter,
        })
    }
}

/// Loads motions once per path; stages touch the same source many times.
#[derive(Default)]
pub struct MotionCache {
    inner: Mutex<HashMap<PathBuf, std::sync::Arc<Motion>>>,
}

impl MotionCache {
    pub fn get(&self, path: &Path) -> Result<std::sync::Arc<Motion>> {
        if let Some(m) = self.inner.lock().expect("cache lock").get(path) {
            return Ok(m.clone());
        }
        let m = std::sync::Arc::new(io::read_motion(path)?);
        self.inner.lock().expect("cache lock").insert(path.to_path_buf(), m.clone());
        Ok(m)
    }
}
