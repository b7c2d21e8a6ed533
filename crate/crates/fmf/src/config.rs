//! Plain-text `key = value` configuration with `FMF_` environment overrides.
//!
//! An environment variable maps to a key by dropping the prefix,
//! lowercasing and reading `_` as `.` where a known key needs it, so
//! `FMF_TAU1` sets `tau1` and `FMF_WEIGHT_PAD_START` sets `weight.pad_start`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use fmf_core::compose::DEFAULT_CHAIN_LENGTHS;
use fmf_core::qc::FilterConfig;
use fmf_core::sample::OpWeights;
use fmf_core::EditKind;

use crate::error::{FmfError, Result};

pub const ENV_PREFIX: &str = "FMF_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorBackend {
    Oracle,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriterBackend {
    Pool,
    Http,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Annotator,
    Expert,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub batch_size: usize,
    pub fraction: f64,
    pub max_disagreements: usize,
    pub neighbors: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            batch_size: 100,
            fraction: 0.3,
            max_disagreements: 3,
            neighbors: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    pub filter: FilterConfig,
    pub weights: OpWeights,
    pub edits_per_record: usize,
    pub generator: GeneratorBackend,
    pub generator_url: Option<String>,
    pub generator_timeout: Duration,
    pub rewriter: RewriterBackend,
    pub rewriter_url: Option<String>,
    pub rewriter_timeout: Duration,
    pub rewrite_count: usize,
    pub chain_lengths: Vec<usize>,
    pub chain_cap: usize,
    pub templates_dir: Option<PathBuf>,
    pub sentences_file: Option<PathBuf>,
    pub audit: AuditConfig,
    pub bind: String,
    pub ui_dir: Option<PathBuf>,
    /// Bearer token to (name, role).
    pub tokens: BTreeMap<String, (String, Role)>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            filter: FilterConfig::default(),
            weights: OpWeights::default(),
            edits_per_record: 3,
            generator: GeneratorBackend::Oracle,
            generator_url: None,
            generator_timeout: Duration::from_secs(30),
            rewriter: RewriterBackend::Pool,
            rewriter_url: None,
            rewriter_timeout: Duration::from_secs(30),
            rewrite_count: 3,
            chain_lengths: DEFAULT_CHAIN_LENGTHS.to_vec(),
            chain_cap: 2,
            templates_dir: None,
            sentences_file: None,
            audit: AuditConfig::default(),
            bind: "127.0.0.1:8080".into(),
            ui_dir: None,
            tokens: BTreeMap::new(),
        }
    }
}

const FIXED_KEYS: &[&str] = &[
    "seed",
    "tau1",
    "tau2",
    "sigma",
    "mirror_margin",
    "edits_per_record",
    "generator",
    "generator.url",
    "generator.timeout_ms",
    "rewriter",
    "rewriter.url",
    "rewriter.timeout_ms",
    "rewrite.count",
    "chain.lengths",
    "chain.cap",
    "templates.dir",
    "sentences.file",
    "audit.batch_size",
    "audit.fraction",
    "audit.max_disagreements",
    "audit.neighbors",
    "service.bind",
    "service.ui_dir",
];

const PREFIX_KEYS: &[&str] = &["weight.", "annotator.", "expert."];

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| FmfError::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            message: "expected key = value".into(),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Maps `FMF_*` variables to config keys; unrelated variables are ignored.
pub fn env_pairs<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, value) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
        let flat = rest.to_ascii_lowercase();
        // read by the CLI itself
        if flat == "config" || flat == "log" {
            continue;
        }
        if let Some(k) = FIXED_KEYS.iter().find(|k| k.replace('.', "_") == flat) {
            out.push((k.to_string(), value));
            continue;
        }
        if let Some(p) = PREFIX_KEYS.iter().find(|p| flat.starts_with(&p.replace('.', "_"))) {
            out.push((format!("{p}{}", &flat[p.len()..]), value));
            continue;
        }
        out.push((flat, value));
    }
    out
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| FmfError::Config(format!("{key}: cannot parse {v:?}")))
}

fn url(v: &str) -> Option<String> {
    (!v.is_empty()).then(|| v.to_string())
}

impl Config {
    /// Defaults, then the file (if any), then `FMF_` variables.
    pub fn load(path: Option<&Path>, env: Vec<(String, String)>) -> Result<Config> {
        let mut cfg = Config::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| FmfError::io(p, e))?;
            for (k, v) in parse_pairs(&text, p)? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in env_pairs(env) {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_env(path: Option<&Path>) -> Result<Config> {
        Config::load(path, std::env::vars().collect())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.seed = num(key, v)?,
            "tau1" => self.filter.tau1 = num(key, v)?,
            "tau2" => self.filter.tau2 = num(key, v)?,
            "sigma" => self.filter.sigma = num(key, v)?,
            "mirror_margin" => self.filter.mirror_margin = num(key, v)?,
            "edits_per_record" => self.edits_per_record = num(key, v)?,
            "generator" => {
                self.generator = match v {
                    "oracle" => GeneratorBackend::Oracle,
                    "http" => GeneratorBackend::Http,
                    _ => return Err(FmfError::Config(format!("generator must be oracle or http, got {v:?}"))),
                }
            }
            "generator.url" => self.generator_url = url(v),
            "generator.timeout_ms" => self.generator_timeout = Duration::from_millis(num(key, v)?),
            "rewriter" => {
                self.rewriter = match v {
                    "pool" => RewriterBackend::Pool,
                    "http" => RewriterBackend::Http,
                    _ => return Err(FmfError::Config(format!("rewriter must be pool or http, got {v:?}"))),
                }
            }
            "rewriter.url" => self.rewriter_url = url(v),
            "rewriter.timeout_ms" => self.rewriter_timeout = Duration::from_millis(num(key, v)?),
            "rewrite.count" => self.rewrite_count = num(key, v)?,
            "chain.lengths" => {
                self.chain_lengths = v
                    .split(',')
                    .map(|s| num::<usize>(key, s.trim()))
                    .collect::<Result<Vec<_>>>()?
            }
            "chain.cap" => self.chain_cap = num(key, v)?,
            "templates.dir" => self.templates_dir = Some(PathBuf::from(v)),
            "sentences.file" => self.sentences_file = Some(PathBuf::from(v)),
            "audit.batch_size" => self.audit.batch_size = num(key, v)?,
            "audit.fraction" => self.audit.fraction = num(key, v)?,
            "audit.max_disagreements" => self.audit.max_disagreements = num(key, v)?,
            "audit.neighbors" => self.audit.neighbors = num(key, v)?,
            "service.bind" => self.bind = v.to_string(),
            "service.ui_dir" => self.ui_dir = Some(PathBuf::from(v)),
            _ => {
                if let Some(kind) = key.strip_prefix("weight.") {
                    let kind = EditKind::from_name(kind).ok_or_else(|| FmfError::Config(format!("unknown edit kind in {key}")))?;
                    self.weights.0.insert(kind, num(key, v)?);
                } else if let Some(name) = key.strip_prefix("annotator.") {
                    self.tokens.insert(v.to_string(), (name.to_string(), Role::Annotator));
                } else if let Some(name) = key.strip_prefix("expert.") {
                    self.tokens.insert(v.to_string(), (name.to_string(), Role::Expert));
                } else {
                    return Err(FmfError::Config(format!("unknown key {key:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.weights.validate()?;
        if self.edits_per_record == 0 {
            return Err(FmfError::Config("edits_per_record must be positive".into()));
        }
        if self.chain_lengths.iter().any(|&l| !(2..=6).contains(&l)) {
            return Err(FmfError::Config("chain lengths must lie in 2..=6".into()));
        }
        if self.audit.batch_size == 0 || !(self.audit.fraction > 0.0 && self.audit.fraction <= 1.0) {
            return Err(FmfError::Config("audit batch size must be positive and fraction in (0, 1]".into()));
        }
        if self.generator == GeneratorBackend::Http && self.generator_url.is_none() {
            return Err(FmfError::Config("generator = http needs generator.url".into()));
        }
        if self.rewriter == RewriterBackend::Http && self.rewriter_url.is_none() {
            return Err(FmfError::Config("rewriter = http needs rewriter.url".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fmf.conf");
        std::fs::write(&p, "# thresholds\ntau1 = 0.97\nweight.pad_start = 0\nchain.lengths = 2, 4\nexpert.ann = s3cret\n").unwrap();
        let env = vec![
            ("FMF_TAU1".to_string(), "0.99".to_string()),
            ("FMF_WEIGHT_SPATIAL_ADD".to_string(), "5".to_string()),
            ("HOME".to_string(), "/root".to_string()),
        ];
        let cfg = Config::load(Some(&p), env).unwrap();
        assert_eq!(cfg.filter.tau1, 0.99);
        assert_eq!(cfg.weights.get(EditKind::PadStart), 0.0);
        assert_eq!(cfg.weights.get(EditKind::SpatialAdd), 5.0);
        assert_eq!(cfg.chain_lengths, vec![2, 4]);
        assert_eq!(cfg.tokens["s3cret"], ("ann".to_string(), Role::Expert));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::load(None, vec![("FMF_NOPE".into(), "1".into())]).is_err());
        assert!(Config::load(None, vec![("FMF_TAU2".into(), "0.99".into())]).is_err());
        assert!(Config::load(None, vec![("FMF_GENERATOR".into(), "http".into())]).is_err());
    }
}
