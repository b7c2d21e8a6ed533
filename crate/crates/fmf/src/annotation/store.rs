//! Annotation state as a fold over an append-only JSONL event log. Every
//! mutation is validated, appended and flushed, then applied; reopening a
//! log replays it into the same state.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::protocol::{audit_outcome, audit_sample, required_verdicts, Decision};
use super::ApiError;
use crate::config::AuditConfig;
use crate::error::{FmfError, Result};

pub const LOG_FILE: &str = "events.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
const SNAPSHOT_EVERY: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletMeta {
    pub id: String,
    pub kind: String,
    pub spatial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Ingest {
        triplets: Vec<TripletMeta>,
    },
    OpenBatch {
        batch_id: String,
        annotator: String,
        entries: Vec<String>,
    },
    Decide {
        annotator: String,
        triplet_id: String,
        decision: Decision,
    },
    Audit {
        batch_id: String,
        expert: String,
        audit_seed: u64,
        verdicts: BTreeMap<String, Decision>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub seq: u64,
    /// Milliseconds since the Unix epoch.
    pub ts: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Queued,
    Assigned,
    Decided,
    /// Decided inside an accepted batch.
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub kind: String,
    pub spatial: bool,
    pub status: EntryStatus,
    pub batch: Option<String>,
    pub decision: Option<Decision>,
    pub annotator: Option<String>,
    pub decided_at: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchStatus {
    Open,
    UnderAudit,
    Accepted,
    Returned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub expert: String,
    pub audit_seed: u64,
    pub sampled: Vec<String>,
    pub disagreements: Vec<String>,
    pub reset: Vec<String>,
    pub overridden: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub id: String,
    pub annotator: String,
    pub entries: Vec<String>,
    /// Smaller than the configured batch size (end of queue).
    pub partial: bool,
    pub decisions: BTreeMap<String, Decision>,
    pub status: BatchStatus,
    pub audit: Option<AuditRecord>,
}

impl Batch {
    pub fn is_complete(&self) -> bool {
        self.decisions.len() == self.entries.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub entries: BTreeMap<String, Entry>,
    /// Queued ids in arrival order.
    pub queue: Vec<String>,
    pub batches: BTreeMap<String, Batch>,
    pub batch_count: u64,
    /// annotator -> (audited entries, agreed entries)
    pub agreement: BTreeMap<String, (usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionAck {
    pub batch_id: String,
    pub decided: usize,
    pub total: usize,
    pub batch_complete: bool,
}

type Clock = Box<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Box::new(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    })
}

pub struct Store {
    state: State,
    cfg: AuditConfig,
    seed: u64,
    seq: u64,
    dir: Option<PathBuf>,
    log: Option<File>,
    clock: Clock,
}

fn err(status: u16, code: &'static str, message: impl Into<String>) -> ApiError {
    ApiError {
        status,
        code,
        message: message.into(),
    }
}

impl Store {
    /// In-memory store without a log.
    pub fn in_memory(cfg: AuditConfig, seed: u64, clock: Clock) -> Store {
        Store {
            state: State::default(),
            cfg,
            seed,
            seq: 0,
            dir: None,
            log: None,
            clock,
        }
    }

    /// Opens (or creates) the log in `dir` and replays it.
    pub fn open(dir: &Path, cfg: AuditConfig, seed: u64, clock: Clock) -> Result<Store> {
        std::fs::create_dir_all(dir).map_err(|e| FmfError::io(dir, e))?;
        let path = dir.join(LOG_FILE);
        let mut store = Store::in_memory(cfg, seed, clock);
        if path.exists() {
            let f = File::open(&path).map_err(|e| FmfError::io(&path, e))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| FmfError::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let ev: LoggedEvent = serde_json::from_str(&line).map_err(|e| FmfError::Parse {
                    path: path.clone(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
                store.validate(&ev.event).map_err(|e| FmfError::Parse {
                    path: path.clone(),
                    line: i + 1,
                    message: e.message,
                })?;
                store.seq = ev.seq;
                store.fold(&ev);
            }
        }
        store.log = Some(OpenOptions::new().create(true).append(true).open(&path).map_err(|e| FmfError::io(&path, e))?);
        store.dir = Some(dir.to_path_buf());
        Ok(store)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn config(&self) -> &AuditConfig {
        &self.cfg
    }

    pub fn events(&self) -> u64 {
        self.seq
    }

    /// Canonical JSON of the folded state.
    pub fn snapshot_json(&self) -> String {
        serde_json::to_string_pretty(&self.state).expect("state serializes")
    }

    pub fn write_snapshot(&self) -> Result<()> {
        if let Some(dir) = &self.dir {
            let p = dir.join(SNAPSHOT_FILE);
            std::fs::write(&p, self.snapshot_json() + "\n").map_err(|e| FmfError::io(&p, e))?;
        }
        Ok(())
    }

    fn commit(&mut self, event: Event) -> Result<(), ApiError> {
        self.validate(&event)?;
        let ev = LoggedEvent {
            seq: self.seq + 1,
            ts: (self.clock)(),
            event,
        };
        if let Some(f) = &mut self.log {
            let mut line = serde_json::to_string(&ev).expect("event serializes");
            line.push('\n');
            f.write_all(line.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| err(500, "storage", e.to_string()))?;
        }
        self.seq = ev.seq;
        self.fold(&ev);
        if self.seq.is_multiple_of(SNAPSHOT_EVERY) {
            self.write_snapshot().map_err(|e| err(500, "storage", e.to_string()))?;
        }
        Ok(())
    }

    fn validate(&self, event: &Event) -> Result<(), ApiError> {
        let s = &self.state;
        match event {
            Event::Ingest { triplets } => {
                if let Some(t) = triplets.iter().find(|t| s.entries.contains_key(&t.id)) {
                    return Err(err(409, "duplicate_triplet", format!("{} already ingested", t.id)));
                }
            }
            Event::OpenBatch { batch_id, entries, .. } => {
                if s.batches.contains_key(batch_id) {
                    return Err(err(409, "duplicate_batch", batch_id.clone()));
                }
                if entries.is_empty() || entries.iter().any(|id| s.entries.get(id).is_none_or(|e| e.status != EntryStatus::Queued)) {
                    return Err(err(409, "not_queued", format!("batch {batch_id} takes entries that are not queued")));
                }
            }
            Event::Decide { annotator, triplet_id, decision } => {
                let e = s
                    .entries
                    .get(triplet_id)
                    .ok_or_else(|| err(404, "unknown_triplet", triplet_id.clone()))?;
                if e.annotator.as_deref() != Some(annotator.as_str()) || e.status == EntryStatus::Queued {
                    return Err(err(403, "not_assigned", format!("{triplet_id} is not assigned to {annotator}")));
                }
                if e.status != EntryStatus::Assigned {
                    return Err(err(409, "already_decided", triplet_id.clone()));
                }
                if matches!(decision, Decision::Revise { .. }) && !e.spatial {
                    return Err(err(422, "revision_not_allowed", format!("{triplet_id} is a {} edit", e.kind)));
                }
                if let Decision::Revise { text } = decision {
                    if text.trim().is_empty() {
                        return Err(err(400, "bad_request", "empty revision"));
                    }
                }
            }
            Event::Audit { batch_id, audit_seed, verdicts, .. } => {
                let b = s.batches.get(batch_id).ok_or_else(|| err(404, "unknown_batch", batch_id.clone()))?;
                match b.status {
                    BatchStatus::Open => return Err(err(409, "batch_not_complete", format!("{batch_id}: {}/{} decided", b.decisions.len(), b.entries.len()))),
                    BatchStatus::Accepted | BatchStatus::Returned => return Err(err(409, "already_audited", batch_id.clone())),
                    BatchStatus::UnderAudit => {}
                }
                for i in self.required_positions(b, *audit_seed) {
                    let id = &b.entries[i];
                    let v = verdicts.get(id).ok_or_else(|| err(422, "missing_verdict", format!("no expert verdict for {id}")))?;
                    if matches!(v, Decision::Revise { .. }) && !s.entries[id].spatial {
                        return Err(err(422, "revision_not_allowed", format!("{id} is not a spatial edit")));
                    }
                }
            }
        }
        Ok(())
    }

    fn required_positions(&self, b: &Batch, audit_seed: u64) -> Vec<usize> {
        let spatial: Vec<bool> = b.entries.iter().map(|id| self.state.entries[id].spatial).collect();
        required_verdicts(&spatial, &audit_sample(b.entries.len(), self.cfg.fraction, audit_seed))
    }

    /// Ids the expert must judge for `audit_seed`: the sample plus all
    /// spatial entries.
    pub fn audit_plan(&self, batch_id: &str, audit_seed: u64) -> Result<(Vec<String>, Vec<String>), ApiError> {
        let b = self.state.batches.get(batch_id).ok_or_else(|| err(404, "unknown_batch", batch_id.to_string()))?;
        let sampled = audit_sample(b.entries.len(), self.cfg.fraction, audit_seed).into_iter().map(|i| b.entries[i].clone()).collect();
        let required = self.required_positions(b, audit_seed).into_iter().map(|i| b.entries[i].clone()).collect();
        Ok((sampled, required))
    }

    fn fold(&mut self, ev: &LoggedEvent) {
        let s = &mut self.state;
        match &ev.event {
            Event::Ingest { triplets } => {
                for t in triplets {
                    s.entries.insert(
                        t.id.clone(),
                        Entry {
                            kind: t.kind.clone(),
                            spatial: t.spatial,
                            status: EntryStatus::Queued,
                            batch: None,
                            decision: None,
                            annotator: None,
                            decided_at: None,
                        },
                    );
                    s.queue.push(t.id.clone());
                }
            }
            Event::OpenBatch { batch_id, annotator, entries } => {
                s.queue.retain(|id| !entries.contains(id));
                for id in entries {
                    let e = s.entries.get_mut(id).expect("validated");
                    e.status = EntryStatus::Assigned;
                    e.batch = Some(batch_id.clone());
                    e.annotator = Some(annotator.clone());
                    e.decision = None;
                    e.decided_at = None;
                }
                s.batch_count += 1;
                s.batches.insert(
                    batch_id.clone(),
                    Batch {
                        id: batch_id.clone(),
                        annotator: annotator.clone(),
                        entries: entries.clone(),
                        partial: entries.len() < self.cfg.batch_size,
                        decisions: BTreeMap::new(),
                        status: BatchStatus::Open,
                        audit: None,
                    },
                );
            }
            Event::Decide { triplet_id, decision, .. } => {
                let e = s.entries.get_mut(triplet_id).expect("validated");
                e.status = EntryStatus::Decided;
                e.decision = Some(decision.clone());
                e.decided_at = Some(ev.ts);
                let b = s.batches.get_mut(e.batch.as_deref().expect("assigned")).expect("batch exists");
                b.decisions.insert(triplet_id.clone(), decision.clone());
                if b.is_complete() {
                    b.status = BatchStatus::UnderAudit;
                }
            }
            Event::Audit { batch_id, expert, audit_seed, verdicts } => {
                let b = s.batches.get(batch_id).expect("validated").clone();
                let decisions: Vec<Decision> = b.entries.iter().map(|id| b.decisions[id].clone()).collect();
                let spatial: Vec<bool> = b.entries.iter().map(|id| s.entries[id].spatial).collect();
                let sampled = audit_sample(b.entries.len(), self.cfg.fraction, *audit_seed);
                let by_pos: BTreeMap<usize, Decision> = b
                    .entries
                    .iter()
                    .enumerate()
                    .filter_map(|(i, id)| verdicts.get(id).map(|v| (i, v.clone())))
                    .collect();
                let outcome = audit_outcome(&decisions, &spatial, &sampled, &by_pos, &self.cfg);

                let agree = s.agreement.entry(b.annotator.clone()).or_default();
                agree.0 += sampled.len();
                agree.1 += sampled.len() - outcome.disagreements.len();

                for (i, id) in b.entries.iter().enumerate() {
                    let e = s.entries.get_mut(id).expect("entry");
                    if outcome.reset.binary_search(&i).is_ok() {
                        e.status = EntryStatus::Queued;
                        e.batch = None;
                        e.decision = None;
                        e.annotator = None;
                        e.decided_at = None;
                        s.queue.push(id.clone());
                    } else {
                        e.status = EntryStatus::Final;
                        if outcome.overridden.contains(&i) {
                            e.decision = by_pos.get(&i).cloned();
                        }
                    }
                }
                let ids = |v: &[usize]| v.iter().map(|&i| b.entries[i].clone()).collect::<Vec<_>>();
                let batch = s.batches.get_mut(batch_id).expect("batch");
                batch.status = if outcome.accepted { BatchStatus::Accepted } else { BatchStatus::Returned };
                batch.audit = Some(AuditRecord {
                    expert: expert.clone(),
                    audit_seed: *audit_seed,
                    sampled: ids(&sampled),
                    disagreements: ids(&outcome.disagreements),
                    reset: ids(&outcome.reset),
                    overridden: ids(&outcome.overridden),
                });
            }
        }
    }

    /// Adds triplets not seen before; returns how many were new.
    pub fn ingest(&mut self, metas: Vec<TripletMeta>) -> Result<usize, ApiError> {
        let fresh: Vec<TripletMeta> = metas.into_iter().filter(|m| !self.state.entries.contains_key(&m.id)).collect();
        let n = fresh.len();
        if n > 0 {
            self.commit(Event::Ingest { triplets: fresh })?;
        }
        Ok(n)
    }

    /// Next undecided entry for `annotator`, opening a randomly drawn batch
    /// from the queue when the annotator has none open.
    pub fn next_for(&mut self, annotator: &str) -> Result<(String, String), ApiError> {
        if let Some(b) = self.open_batch_of(annotator) {
            let id = b.entries.iter().find(|id| !b.decisions.contains_key(*id)).expect("open batch has undecided entries");
            return Ok((b.id.clone(), id.clone()));
        }
        if self.state.queue.is_empty() {
            return Err(err(404, "queue_empty", "no entries left to annotate"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ self.state.batch_count.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let take = self.cfg.batch_size.min(self.state.queue.len());
        let entries: Vec<String> = index::sample(&mut rng, self.state.queue.len(), take)
            .into_iter()
            .map(|i| self.state.queue[i].clone())
            .collect();
        let batch_id = format!("b{:05}", self.state.batch_count + 1);
        self.commit(Event::OpenBatch {
            batch_id: batch_id.clone(),
            annotator: annotator.to_string(),
            entries: entries.clone(),
        })?;
        Ok((batch_id, entries[0].clone()))
    }

    fn open_batch_of(&self, annotator: &str) -> Option<&Batch> {
        self.state
            .batches
            .values()
            .find(|b| b.annotator == annotator && b.status == BatchStatus::Open)
    }

    pub fn decide(&mut self, annotator: &str, triplet_id: &str, decision: Decision) -> Result<DecisionAck, ApiError> {
        self.commit(Event::Decide {
            annotator: annotator.to_string(),
            triplet_id: triplet_id.to_string(),
            decision,
        })?;
        let b = &self.state.batches[self.state.entries[triplet_id].batch.as_deref().expect("assigned")];
        Ok(DecisionAck {
            batch_id: b.id.clone(),
            decided: b.decisions.len(),
            total: b.entries.len(),
            batch_complete: b.is_complete(),
        })
    }

    pub fn audit(&mut self, batch_id: &str, expert: &str, audit_seed: u64, verdicts: BTreeMap<String, Decision>) -> Result<&Batch, ApiError> {
        self.commit(Event::Audit {
            batch_id: batch_id.to_string(),
            expert: expert.to_string(),
            audit_seed,
            verdicts,
        })?;
        Ok(&self.state.batches[batch_id])
    }

    pub fn batch(&self, id: &str) -> Option<&Batch> {
        self.state.batches.get(id)
    }

    /// Ids with their final keeping decision, in id order.
    pub fn exportable(&self) -> Vec<(&str, &Decision)> {
        self.state
            .entries
            .iter()
            .filter(|(_, e)| e.status == EntryStatus::Final)
            .filter_map(|(id, e)| e.decision.as_ref().filter(|d| d.keeps()).map(|d| (id.as_str(), d)))
            .collect()
    }
}
