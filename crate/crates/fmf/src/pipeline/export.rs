//! Split-aware export with copied motions, statistics and a checksummed
//! manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{dataset_stats, DatasetStats};
use crate::error::{FmfError, Result};
use crate::io;
use crate::record::{Annotation, EditTriplet, Split};

#[derive(Debug, Clone, Copy, Default)]
pub struct ExportOptions {
    /// Treat still-pending triplets that passed quality control as accepted,
    /// for runs without a human annotation pass.
    pub accept_pending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub triplets: BTreeMap<String, usize>,
    pub motions: usize,
    pub excluded: usize,
    pub files: Vec<ManifestEntry>,
}

fn exportable(t: &EditTriplet, opts: ExportOptions) -> bool {
    t.qc_accepted()
        && match t.annotation {
            Annotation::Accepted | Annotation::Revised { .. } => true,
            Annotation::Pending => opts.accept_pending,
            Annotation::Rejected => false,
        }
}

pub fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let mut f = std::fs::File::open(path).map_err(|e| FmfError::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut n = 0u64;
    loop {
        let r = f.read(&mut buf).map_err(|e| FmfError::io(path, e))?;
        if r == 0 {
            break;
        }
        n += r as u64;
        h.update(&buf[..r]);
    }
    let hex = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((n, hex))
}

/// Exports triplets from `inputs` into `out_dir`:
/// `<split>/triplets.jsonl`, `motions/`, `stats.json`, `manifest.json`.
pub fn export(inputs: &[PathBuf], out_dir: &Path, opts: ExportOptions) -> Result<(Manifest, DatasetStats)> {
    let mut chosen: Vec<EditTriplet> = Vec::new();
    let mut excluded = 0;
    let mut ids = BTreeSet::new();
    // motion file name -> absolute source path
    let mut motions: BTreeMap<String, PathBuf> = BTreeMap::new();
    for input in inputs {
        let base = io::dir_of(input);
        for mut t in io::read_jsonl::<EditTriplet>(input)? {
            if !exportable(&t, opts) {
                excluded += 1;
                continue;
            }
            if !ids.insert(t.id.clone()) {
                return Err(FmfError::Validation(format!("duplicate triplet id {}", t.id)));
            }
            if let Annotation::Revised { text } = &t.annotation {
                t.instruction_basic = text.clone();
            }
            let tid = t.id.clone();
            t.map_refs(|r| {
                let abs = io::resolve_ref(&base, r);
                let name = abs
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .ok_or_else(|| FmfError::Validation(format!("bad motion ref {r:?}")))?;
                if let Some(prev) = motions.get(&name) {
                    if *prev != abs {
                        return Err(FmfError::Validation(format!("motion name {name} used by {} and {}", prev.display(), abs.display())));
                    }
                } else {
                    if !abs.exists() {
                        return Err(FmfError::Validation(format!("triplet {tid} references missing motion {}", abs.display())));
                    }
                    motions.insert(name.clone(), abs);
                }
                Ok(format!("../motions/{name}"))
            })?;
            chosen.push(t);
        }
    }
    chosen.sort_by(|a, b| a.id.cmp(&b.id));

    // A motion id may only ever appear under one split.
    let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
    for t in &chosen {
        let mut ids = vec![t.source_id.as_str(), t.target_id.as_str()];
        if let crate::record::EditInfo::Complex(c) = &t.edit {
            ids.extend(c.cot.iter().map(|s| s.motion_id.as_str()));
        }
        for id in ids {
            if let Some(prev) = seen.insert(id, t.split) {
                if prev != t.split {
                    return Err(FmfError::Validation(format!("motion {id} appears in both {prev} and {}", t.split)));
                }
            }
        }
    }

    let mdir = out_dir.join("motions");
    std::fs::create_dir_all(&mdir).map_err(|e| FmfError::io(&mdir, e))?;
    for (name, src) in &motions {
        let dst = mdir.join(name);
        std::fs::copy(src, &dst).map_err(|e| FmfError::io(src, e))?;
    }
    let mut counts = BTreeMap::new();
    for split in Split::ALL {
        let rows: Vec<&EditTriplet> = chosen.iter().filter(|t| t.split == split).collect();
        counts.insert(split.name().to_string(), rows.len());
        io::write_jsonl(&out_dir.join(split.name()).join("triplets.jsonl"), &rows)?;
    }
    let stats = dataset_stats(&chosen);
    io::write_json(&out_dir.join("stats.json"), &stats)?;

    let mut files = Vec::new();
    let mut rels: Vec<String> = Split::ALL.iter().map(|s| format!("{}/triplets.jsonl", s.name())).collect();
    rels.push("stats.json".into());
    rels.extend(motions.keys().map(|n| format!("motions/{n}")));
    rels.sort();
    for rel in rels {
        let (bytes, sha256) = sha256_file(&out_dir.join(&rel))?;
        files.push(ManifestEntry { path: rel, bytes, sha256 });
    }
    let manifest = Manifest {
        triplets: counts,
        motions: motions.len(),
        excluded,
        files,
    };
    io::write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok((manifest, stats))
}
