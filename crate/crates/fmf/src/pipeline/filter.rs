//! Automatic quality control over candidate triplets.

use std::collections::BTreeMap;
use std::path::Path;

use fmf_core::qc::{Check, Filter};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MotionCache;
use crate::error::{FmfError, Result};
use crate::io;
use crate::record::{EditInfo, EditTriplet, Qc};

/// Per-kind totals and per-check rejection counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total: usize,
    pub accepted: usize,
    /// kind -> (total, accepted)
    pub per_kind: BTreeMap<String, (usize, usize)>,
    /// (check, kind) -> number of triplets failing that check
    pub rejections: BTreeMap<(String, String), usize>,
}

impl FilterReport {
    pub fn rejected_by(&self, check: Check) -> usize {
        self.rejections.iter().filter(|((c, _), _)| c == check.name()).map(|(_, n)| n).sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| FmfError::Validation(format!("{}: {e}", path.display())))?;
        let err = |e: csv::Error| FmfError::Validation(format!("{}: {e}", path.display()));
        w.write_record(["check", "kind", "count"]).map_err(err)?;
        for ((check, kind), n) in &self.rejections {
            w.write_record([check.as_str(), kind.as_str(), &n.to_string()]).map_err(err)?;
        }
        w.flush().map_err(|e| FmfError::io(path, e))
    }
}

/// Runs the checks on one triplet whose motion refs resolve against `base`.
pub fn check_triplet(filter: &Filter, t: &EditTriplet, base: &Path, cache: &MotionCache) -> Result<Qc> {
    let load = |r: &str| cache.get(&io::resolve_ref(base, r));
    let verdicts = match &t.edit {
        EditInfo::Atomic { edit } => {
            let (src, tgt) = (load(&t.source_motion)?, load(&t.target_motion)?);
            vec![filter.check(&src, &tgt, edit)]
        }
        EditInfo::Complex(c) => {
            let mut prev = load(&t.source_motion)?;
            let mut out = Vec::with_capacity(c.cot.len());
            for step in &c.cot {
                let next = load(&step.motion)?;
                out.push(filter.check(&prev, &next, &step.edit));
                prev = next;
            }
            out
        }
    };
    Ok(Qc::from_verdicts(verdicts))
}

/// Attaches a verdict to every triplet. Returns all triplets plus the report.
pub fn run_filters(filter: &Filter, triplets: Vec<EditTriplet>, base: &Path) -> Result<(Vec<EditTriplet>, FilterReport)> {
    let cache = MotionCache::default();
    let checked = triplets
        .into_par_iter()
        .map(|mut t| {
            t.qc = Some(check_triplet(filter, &t, base, &cache)?);
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = FilterReport::default();
    for t in &checked {
        let kind = match &t.edit {
            EditInfo::Atomic { edit } => edit.kind().name().to_string(),
            EditInfo::Complex(_) => "complex".to_string(),
        };
        let ok = t.qc_accepted();
        report.total += 1;
        report.accepted += usize::from(ok);
        let slot = report.per_kind.entry(kind.clone()).or_default();
        slot.0 += 1;
        slot.1 += usize::from(ok);
        let mut failed: Vec<&'static str> = t
            .qc
            .iter()
            .flat_map(|q| &q.verdicts)
            .flat_map(|v| &v.failed_checks)
            .map(|f| f.check.name())
            .collect();
        failed.sort_unstable();
        failed.dedup();
        for c in failed {
            *report.rejections.entry((c.to_string(), kind.clone())).or_default() += 1;
        }
    }
    Ok((checked, report))
}

/// File-level stage: writes accepted triplets to `out` (refs re-based to its
/// directory) and optionally the rejected ones and a CSV report.
pub fn filter_file(filter: &Filter, input: &Path, out: &Path, rejected: Option<&Path>, report_csv: Option<&Path>) -> Result<FilterReport> {
    let base = io::dir_of(input);
    let triplets: Vec<EditTriplet> = io::read_jsonl(input)?;
    let (checked, report) = run_filters(filter, triplets, &base)?;
    let out_dir = io::dir_of(out);
    let rebase = |mut t: EditTriplet, to: &Path| -> Result<EditTriplet> {
        t.map_refs(|r| io::relative_ref(to, &io::resolve_ref(&base, r)))?;
        Ok(t)
    };
    let (ok, bad): (Vec<_>, Vec<_>) = checked.into_iter().partition(|t| t.qc_accepted());
    let ok = ok.into_iter().map(|t| rebase(t, &out_dir)).collect::<Result<Vec<_>>>()?;
    io::write_jsonl(out, &ok)?;
    if let Some(p) = rejected {
        let dir = io::dir_of(p);
        let bad = bad.into_iter().map(|t| rebase(t, &dir)).collect::<Result<Vec<_>>>()?;
        io::write_jsonl(p, &bad)?;
    }
    if let Some(p) = report_csv {
        report.write_csv(p)?;
    }
    Ok(report)
}
