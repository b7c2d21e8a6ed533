//! Instruction statistics over triplet files.

use std::collections::BTreeMap;

use fmf_core::stats::{text_stats, TextStats};
use serde::{Deserialize, Serialize};

use crate::record::{EditTriplet, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub atomic_basic: TextStats,
    pub atomic_rewritten: TextStats,
    pub complex_basic: TextStats,
    pub complex_rewritten: TextStats,
    pub all: TextStats,
    /// split -> edit kind (or `complex`) -> count
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
}

pub fn dataset_stats(triplets: &[EditTriplet]) -> DatasetStats {
    let mut groups: [Vec<&str>; 4] = Default::default();
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = Split::ALL.iter().map(|s| (s.name().to_string(), BTreeMap::new())).collect();
    for t in triplets {
        let (b, r) = if t.is_complex() { (2, 3) } else { (0, 1) };
        groups[b].push(t.final_instruction());
        groups[r].extend(t.instructions_rewritten.iter().map(String::as_str));
        let key = match t.atomic_edit() {
            Some(e) => e.kind().name().to_string(),
            None => "complex".to_string(),
        };
        *counts.entry(t.split.name().to_string()).or_default().entry(key).or_default() += 1;
    }
    let all: Vec<&str> = groups.iter().flatten().copied().collect();
    DatasetStats {
        atomic_basic: text_stats(&groups[0]),
        atomic_rewritten: text_stats(&groups[1]),
        complex_basic: text_stats(&groups[2]),
        complex_rewritten: text_stats(&groups[3]),
        all: text_stats(&all),
        counts,
    }
}
