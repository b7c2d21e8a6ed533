//! File formats: motion-json (whole-object and streaming), codebooks,
//! template directories, sentence pools and JSONL record files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Component, Path, PathBuf};

use fmf_core::instruction::TemplateSet;
use fmf_core::sample::SentencePool;
use fmf_core::tokenizer::Codebook;
use fmf_core::{EditKind, Motion};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{FmfError, Result};

pub const STREAM_FORMAT: &str = "motion-json-stream v1";

fn parse_err(path: &Path, line: usize, e: impl std::fmt::Display) -> FmfError {
    FmfError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| FmfError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| FmfError::io(path, e))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| FmfError::io(path, e))?))
}

#[derive(Serialize, Deserialize)]
struct StreamHeader {
    format: String,
    fps: u32,
    dims: usize,
}

/// Reads a motion. Files ending in `.jsonl` use the streaming layout: a
/// header line followed by one frame array per line.
pub fn read_motion(path: &Path) -> Result<Motion> {
    let r = open(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        let mut lines = r.lines();
        let head = lines.next().ok_or_else(|| parse_err(path, 1, "missing header"))?.map_err(|e| FmfError::io(path, e))?;
        let h: StreamHeader = serde_json::from_str(&head).map_err(|e| parse_err(path, 1, e))?;
        if h.format != STREAM_FORMAT {
            return Err(parse_err(path, 1, format!("unsupported format {:?}", h.format)));
        }
        let mut frames = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| FmfError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<f32> = serde_json::from_str(&line).map_err(|e| parse_err(path, i + 2, e))?;
            if f.len() != h.dims {
                return Err(parse_err(path, i + 2, format!("frame has {} values, expected {}", f.len(), h.dims)));
            }
            frames.push(f);
        }
        return Ok(Motion::from_frames(h.fps, &frames)?);
    }
    serde_json::from_reader(r).map_err(|e| parse_err(path, 0, e))
}

pub fn write_motion(path: &Path, m: &Motion) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| FmfError::io(path, e);
    if path.extension().is_some_and(|e| e == "jsonl") {
        let head = StreamHeader {
            format: STREAM_FORMAT.into(),
            fps: m.fps(),
            dims: m.dims(),
        };
        serde_json::to_writer(&mut w, &head).map_err(|e| parse_err(path, 0, e))?;
        w.write_all(b"\n").map_err(io)?;
        for f in m.frames() {
            serde_json::to_writer(&mut w, f).map_err(|e| parse_err(path, 0, e))?;
            w.write_all(b"\n").map_err(io)?;
        }
    } else {
        serde_json::to_writer(&mut w, m).map_err(|e| parse_err(path, 0, e))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_codebook(path: &Path) -> Result<Codebook> {
    serde_json::from_reader(open(path)?).map_err(|e| parse_err(path, 0, e))
}

pub fn write_codebook(path: &Path, cb: &Codebook) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, cb).map_err(|e| parse_err(path, 0, e))?;
    w.flush().map_err(|e| FmfError::io(path, e))
}

/// Loads `<kind>.txt` files from `dir`; kinds without a file keep the
/// default template.
pub fn read_templates(dir: &Path) -> Result<TemplateSet> {
    let mut set = TemplateSet::default();
    for kind in EditKind::ALL {
        let p = dir.join(format!("{}.txt", kind.name()));
        if p.exists() {
            let text = std::fs::read_to_string(&p).map_err(|e| FmfError::io(&p, e))?;
            set = set.with(kind, text.trim_end_matches(['\n', '\r']))?;
        }
    }
    Ok(set)
}

pub fn write_templates(dir: &Path, set: &TemplateSet) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| FmfError::io(dir, e))?;
    for kind in EditKind::ALL {
        let p = dir.join(format!("{}.txt", kind.name()));
        std::fs::write(&p, format!("{}\n", set.get(kind))).map_err(|e| FmfError::io(&p, e))?;
    }
    Ok(())
}

pub fn read_sentence_pool(path: &Path) -> Result<SentencePool> {
    let text = std::fs::read_to_string(path).map_err(|e| FmfError::io(path, e))?;
    SentencePool::from_tsv(&text).map_err(|e| parse_err(path, 0, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| FmfError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| parse_err(path, i + 1, e))?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| parse_err(path, 0, e))?;
        w.write_all(b"\n").map_err(|e| FmfError::io(path, e))?;
    }
    w.flush().map_err(|e| FmfError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| parse_err(path, 0, e))?;
    w.write_all(b"\n").map_err(|e| FmfError::io(path, e))?;
    w.flush().map_err(|e| FmfError::io(path, e))
}

/// `target` relative to `base_dir`, with `/` separators. Records store
/// motion references this way so output trees can be moved as a whole.
pub fn relative_ref(base_dir: &Path, target: &Path) -> Result<String> {
    let abs = |p: &Path| -> Result<PathBuf> {
        std::path::absolute(p).map(|p| normalize(&p)).map_err(|e| FmfError::io(p, e))
    };
    let rel = pathdiff::diff_paths(abs(target)?, abs(base_dir)?)
        .ok_or_else(|| FmfError::Validation(format!("cannot express {} relative to {}", target.display(), base_dir.display())))?;
    Ok(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"))
}

pub fn resolve_ref(base_dir: &Path, r: &str) -> PathBuf {
    normalize(&base_dir.join(r))
}

fn normalize(p: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir if matches!(out.components().next_back(), Some(Component::Normal(_))) => {
                out.pop();
            }
            _ => out.push(c),
        }
    }
    out
}

/// Directory of a file path, `.` when it has none.
pub fn dir_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}
