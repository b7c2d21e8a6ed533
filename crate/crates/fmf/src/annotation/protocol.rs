//! Batch-audit rules, independent of storage and transport.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::AuditConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
    /// Accept with a corrected instruction; spatial edits only.
    Revise { text: String },
}

impl Decision {
    /// Whether the entry stays in the dataset.
    pub fn keeps(&self) -> bool {
        !matches!(self, Decision::Reject)
    }
}

/// Number of entries the expert samples from a batch of `n`.
pub fn audit_sample_size(n: usize, fraction: f64) -> usize {
    // the epsilon keeps 0.3 * 10 = 3.0000000000000004 from rounding up
    ((n as f64 * fraction - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Sorted batch positions sampled for audit; reproducible for a given seed.
pub fn audit_sample(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = index::sample(&mut rng, n, audit_sample_size(n, fraction)).into_vec();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub accepted: bool,
    /// Sampled positions where the expert disagrees with the annotator.
    pub disagreements: Vec<usize>,
    /// Positions sent back for re-annotation.
    pub reset: Vec<usize>,
    /// Positions outside `reset` whose decision the expert overrode
    /// (spatial entries are checked one by one).
    pub overridden: Vec<usize>,
}

/// Applies the audit rule to a fully decided batch.
///
/// `expert` holds the expert's verdict per position; it must cover the
/// sampled positions and every spatial position. At most
/// `max_disagreements` disagreements among the sampled entries accept the
/// batch, resetting each disagreeing entry and `neighbors` entries on each
/// side; more return the whole batch.
pub fn audit_outcome(
    decisions: &[Decision],
    spatial: &[bool],
    sampled: &[usize],
    expert: &BTreeMap<usize, Decision>,
    cfg: &AuditConfig,
) -> AuditOutcome {
    let n = decisions.len();
    let disagreements: Vec<usize> = sampled
        .iter()
        .copied()
        .filter(|&i| expert.get(&i).is_some_and(|v| v.keeps() != decisions[i].keeps()))
        .collect();
    if disagreements.len() > cfg.max_disagreements {
        return AuditOutcome {
            accepted: false,
            disagreements,
            reset: (0..n).collect(),
            overridden: Vec::new(),
        };
    }
    let mut reset = BTreeSet::new();
    for &d in &disagreements {
        let lo = d.saturating_sub(cfg.neighbors);
        let hi = (d + cfg.neighbors).min(n - 1);
        reset.extend(lo..=hi);
    }
    let overridden = (0..n)
        .filter(|i| spatial[*i] && !reset.contains(i))
        .filter(|i| expert.get(i).is_some_and(|v| *v != decisions[*i]))
        .collect();
    AuditOutcome {
        accepted: true,
        disagreements,
        reset: reset.into_iter().collect(),
        overridden,
    }
}

/// Positions the expert must judge: the sample plus every spatial entry.
pub fn required_verdicts(spatial: &[bool], sampled: &[usize]) -> Vec<usize> {
    let mut v: BTreeSet<usize> = sampled.iter().copied().collect();
    v.extend(spatial.iter().enumerate().filter(|(_, s)| **s).map(|(i, _)| i));
    v.into_iter().collect()
}
