//! Motion generator and instruction rewriter backends.

use std::time::Duration;

use fmf_core::compose::replay_step;
use fmf_core::rewrite::{Rewriter, TemplatePoolRewriter};
use fmf_core::vocab::render_fine_script;
use fmf_core::{AtomicEdit, EditKind, FineScript, Motion};
use serde::{Deserialize, Serialize};

use crate::error::{FmfError, Result};

/// What a generator gets for one candidate.
pub struct GenerateRequest<'a> {
    pub caption: &'a str,
    /// Script the generated motion should follow.
    pub script: &'a FineScript,
    pub source: &'a Motion,
    pub edit: &'a AtomicEdit,
    pub seed: u64,
}

pub trait Generator: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, req: &GenerateRequest<'_>) -> Result<Motion>;
}

/// Derives the target from the source with the frame-level editors.
pub struct OracleGenerator;

impl Generator for OracleGenerator {
    fn id(&self) -> &str {
        "oracle"
    }

    fn generate(&self, req: &GenerateRequest<'_>) -> Result<Motion> {
        Ok(replay_step(req.source, req.edit, None)?)
    }
}

#[derive(Serialize)]
struct HttpGenerateBody<'a> {
    caption: &'a str,
    fine_script: String,
    seed: u64,
}

/// Calls a text-to-motion service: POST `{caption, fine_script, seed}`,
/// response is a motion-json object.
pub struct HttpGenerator {
    agent: ureq::Agent,
    url: String,
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into()
}

impl HttpGenerator {
    pub fn new(url: &str, timeout: Duration) -> Self {
        HttpGenerator {
            agent: agent(timeout),
            url: url.to_string(),
        }
    }
}

impl Generator for HttpGenerator {
    fn id(&self) -> &str {
        "http"
    }

    fn generate(&self, req: &GenerateRequest<'_>) -> Result<Motion> {
        let body = HttpGenerateBody {
            caption: req.caption,
            fine_script: render_fine_script(req.script),
            seed: req.seed,
        };
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(&body)
            .map_err(|e| FmfError::Backend(format!("generator {}: {e}", self.url)))?;
        resp.body_mut()
            .with_config()
            .limit(512 * 1024 * 1024)
            .read_json::<Motion>()
            .map_err(|e| FmfError::Backend(format!("generator {}: {e}", self.url)))
    }
}

#[derive(Serialize)]
struct RewriteBody<'a> {
    basic: &'a str,
    kind: &'a str,
}

#[derive(Deserialize)]
struct RewriteResponse {
    paraphrases: Vec<String>,
}

/// Paraphrase service: POST `{basic, kind}`, response `{paraphrases: [..]}`.
pub struct HttpRewriter {
    agent: ureq::Agent,
    url: String,
}

impl HttpRewriter {
    pub fn new(url: &str, timeout: Duration) -> Self {
        HttpRewriter {
            agent: agent(timeout),
            url: url.to_string(),
        }
    }
}

impl Rewriter for HttpRewriter {
    fn rewrite(&self, basic: &str, kind: EditKind, count: usize, _seed: u64) -> fmf_core::Result<Vec<String>> {
        if basic.trim().is_empty() {
            return Err(fmf_core::Error::InvalidArgument("empty instruction".into()));
        }
        let unavailable = |e: String| fmf_core::Error::RewriterUnavailable(format!("{}: {e}", self.url));
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(&RewriteBody { basic, kind: kind.name() })
            .map_err(|e| unavailable(e.to_string()))?;
        let r: RewriteResponse = resp.body_mut().read_json().map_err(|e| unavailable(e.to_string()))?;
        let out: Vec<String> = r.paraphrases.into_iter().filter(|p| !p.trim().is_empty()).take(count).collect();
        if out.is_empty() && count > 0 {
            return Err(unavailable("no paraphrases returned".into()));
        }
        Ok(out)
    }
}

/// Tries the primary rewriter and falls back to the template pool when it
/// is unavailable.
pub struct FallbackRewriter<R> {
    pub primary: R,
    pub fallback: TemplatePoolRewriter,
}

impl<R: Rewriter> Rewriter for FallbackRewriter<R> {
    fn rewrite(&self, basic: &str, kind: EditKind, count: usize, seed: u64) -> fmf_core::Result<Vec<String>> {
        match self.primary.rewrite(basic, kind, count, seed) {
            Err(fmf_core::Error::RewriterUnavailable(why)) => {
                tracing::warn!("rewriter unavailable, using template pool: {why}");
                self.fallback.rewrite(basic, kind, count, seed)
            }
            other => other,
        }
    }
}
