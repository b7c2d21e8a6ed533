//! HTTP API over the annotation store.
//!
//! All mutations go through the store's write lock, so there is one writer;
//! reads share the lock.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fmf_core::sample::SentencePool;
use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use super::payload::{alignment, highlights, joint_track, AlignSegment, Highlights, JointTrack};
use super::protocol::Decision;
use super::store::{Batch, DecisionAck, Store, TripletMeta};
use super::ApiError;
use crate::config::Role;
use crate::error::Result;
use crate::io;
use crate::pipeline::{keyed_rng, MotionCache};
use crate::record::{Annotation, EditInfo, EditTriplet};

const EXAMPLE_SENTENCES: usize = 5;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn api_err(status: u16, code: &'static str, message: impl Into<String>) -> ApiError {
    ApiError {
        status,
        code,
        message: message.into(),
    }
}

pub struct AppState {
    pub store: RwLock<Store>,
    /// Triplets under review, with motion references made absolute.
    triplets: BTreeMap<String, EditTriplet>,
    motions: MotionCache,
    pool: SentencePool,
    tokens: BTreeMap<String, (String, Role)>,
    seed: u64,
}

/// Spatial for revision and expert-check purposes: any spatial step.
pub fn meta_of(t: &EditTriplet) -> TripletMeta {
    let kinds = t.kinds();
    TripletMeta {
        id: t.id.clone(),
        kind: if t.is_complex() { "complex".into() } else { kinds[0].name().into() },
        spatial: kinds.iter().any(|k| k.is_spatial()),
    }
}

impl AppState {
    /// Loads triplets from `input` and queues the ones that passed
    /// automatic QC and are not yet known to the store.
    pub fn new(
        mut store: Store,
        input: &Path,
        pool: SentencePool,
        tokens: BTreeMap<String, (String, Role)>,
        seed: u64,
    ) -> Result<AppState> {
        let base = std::path::absolute(io::dir_of(input)).map_err(|e| crate::FmfError::io(input, e))?;
        let mut triplets = BTreeMap::new();
        for mut t in io::read_jsonl::<EditTriplet>(input)? {
            if !t.qc_accepted() {
                continue;
            }
            t.map_refs(|r| Ok(io::resolve_ref(&base, r).to_string_lossy().into_owned()))?;
            triplets.insert(t.id.clone(), t);
        }
        store
            .ingest(triplets.values().map(meta_of).collect())
            .map_err(|e| crate::FmfError::Validation(e.to_string()))?;
        Ok(AppState {
            store: RwLock::new(store),
            triplets,
            motions: MotionCache::default(),
            pool,
            tokens,
            seed,
        })
    }

    fn auth(&self, headers: &HeaderMap, role: Role) -> Result<String, ApiError> {
        let token = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or_else(|| api_err(401, "unauthorized", "missing bearer token"))?;
        let (name, r) = self.tokens.get(token.trim()).ok_or_else(|| api_err(401, "unauthorized", "unknown token"))?;
        if *r != role {
            return Err(api_err(403, "forbidden", format!("{name} lacks the {role:?} role")));
        }
        Ok(name.clone())
    }

    fn any_auth(&self, headers: &HeaderMap) -> Result<String, ApiError> {
        self.auth(headers, Role::Annotator).or_else(|_| self.auth(headers, Role::Expert))
    }

    fn triplet(&self, id: &str) -> Result<&EditTriplet, ApiError> {
        self.triplets.get(id).ok_or_else(|| api_err(404, "unknown_triplet", id.to_string()))
    }

    fn motion(&self, path: &str) -> Result<Arc<fmf_core::Motion>, ApiError> {
        self.motions.get(Path::new(path)).map_err(|e| api_err(500, "storage", e.to_string()))
    }

    fn track(&self, path: &str, stride: usize) -> Result<JointTrack, ApiError> {
        joint_track(self.motion(path)?.as_ref(), stride).map_err(|e| api_err(500, "invalid_motion", e.to_string()))
    }

    pub fn payload(&self, batch_id: String, id: &str, stride: usize) -> Result<Payload, ApiError> {
        let t = self.triplet(id)?;
        let source = self.track(&t.source_motion, stride)?;
        let target = self.track(&t.target_motion, stride)?;
        let (hl, align, part, examples) = match &t.edit {
            EditInfo::Atomic { edit } => {
                let part = edit.body_part();
                let examples = match part {
                    Some(part) => {
                        let candidates: Vec<&str> = self.pool.by_part(part).map(|s| s.text()).collect();
                        let mut rng = keyed_rng(self.seed, &format!("examples:{id}"));
                        candidates.choose_multiple(&mut rng, EXAMPLE_SENTENCES).map(|s| s.to_string()).collect()
                    }
                    None => Vec::new(),
                };
                (highlights(edit), alignment(edit, source.total_frames), part.map(|p| p.name().to_string()), examples)
            }
            EditInfo::Complex(_) => (Highlights::default(), None, None, Vec::new()),
        };
        Ok(Payload {
            batch_id,
            triplet: t.clone(),
            source,
            target,
            highlights: hl,
            alignment: align,
            body_part: part,
            example_sentences: examples,
        })
    }

    /// Triplets cleared by review, in id order, with revisions applied.
    pub fn export(&self) -> Vec<EditTriplet> {
        let store = self.store.read().expect("store lock");
        store
            .exportable()
            .into_iter()
            .filter_map(|(id, d)| {
                let mut t = self.triplets.get(id)?.clone();
                t.annotation = match d {
                    Decision::Revise { text } => {
                        t.instruction_basic = text.clone();
                        Annotation::Revised { text: text.clone() }
                    }
                    _ => Annotation::Accepted,
                };
                Some(t)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Payload {
    pub batch_id: String,
    pub triplet: EditTriplet,
    pub source: JointTrack,
    pub target: JointTrack,
    pub highlights: Highlights,
    /// Source frame to target frame for unedited regions (temporal edits).
    pub alignment: Option<Vec<AlignSegment>>,
    pub body_part: Option<String>,
    pub example_sentences: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct StrideQuery {
    stride: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct AuditSeedQuery {
    audit_seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub triplet_id: String,
    pub decision: Decision,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AuditRequest {
    pub audit_seed: u64,
    pub verdicts: BTreeMap<String, Decision>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BatchView {
    pub batch: Batch,
    /// For a requested audit seed: the sampled ids and every id needing an
    /// expert verdict.
    pub audit_sample: Option<Vec<String>>,
    pub audit_required: Option<Vec<String>>,
}

type Shared = Arc<AppState>;

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

async fn next(State(s): State<Shared>, headers: HeaderMap, Query(q): Query<StrideQuery>) -> Result<Json<Payload>, ApiError> {
    let who = s.auth(&headers, Role::Annotator)?;
    let (batch, id) = s.store.write().expect("store lock").next_for(&who)?;
    Ok(Json(s.payload(batch, &id, q.stride.unwrap_or(1))?))
}

async fn decision(State(s): State<Shared>, headers: HeaderMap, Json(req): Json<DecisionRequest>) -> Result<Json<DecisionAck>, ApiError> {
    let who = s.auth(&headers, Role::Annotator)?;
    let ack = s.store.write().expect("store lock").decide(&who, &req.triplet_id, req.decision)?;
    Ok(Json(ack))
}

async fn audit(
    State(s): State<Shared>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
    Json(req): Json<AuditRequest>,
) -> Result<Json<Batch>, ApiError> {
    let who = s.auth(&headers, Role::Expert)?;
    let mut store = s.store.write().expect("store lock");
    let batch = store.audit(&id, &who, req.audit_seed, req.verdicts)?.clone();
    Ok(Json(batch))
}

async fn batch(
    State(s): State<Shared>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<AuditSeedQuery>,
) -> Result<Json<BatchView>, ApiError> {
    s.any_auth(&headers)?;
    let store = s.store.read().expect("store lock");
    let b = store.batch(&id).ok_or_else(|| api_err(404, "unknown_batch", id.clone()))?.clone();
    let (sample, required) = match q.audit_seed {
        Some(seed) => {
            let (a, r) = store.audit_plan(&id, seed)?;
            (Some(a), Some(r))
        }
        None => (None, None),
    };
    Ok(Json(BatchView {
        batch: b,
        audit_sample: sample,
        audit_required: required,
    }))
}

async fn export(State(s): State<Shared>, headers: HeaderMap) -> Result<Response, ApiError> {
    s.any_auth(&headers)?;
    let mut body = String::new();
    for t in s.export() {
        body.push_str(&serde_json::to_string(&t).map_err(|e| api_err(500, "serialize", e.to_string()))?);
        body.push('\n');
    }
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

async fn frames(
    State(s): State<Shared>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<StrideQuery>,
) -> Result<Json<serde_json::Value>, ApiError> {
    s.any_auth(&headers)?;
    let t = s.triplet(&id)?;
    let stride = q.stride.unwrap_or(1);
    if stride == 0 {
        return Err(api_err(400, "bad_request", "stride must be positive"));
    }
    let source = s.track(&t.source_motion, stride)?;
    let target = s.track(&t.target_motion, stride)?;
    Ok(Json(serde_json::json!({"id": id, "source": source, "target": target})))
}

async fn not_found() -> ApiError {
    api_err(404, "not_found", "no such endpoint")
}

pub fn router(state: Shared, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/next", get(next))
        .route("/api/decision", post(decision))
        .route("/api/batch/{id}", get(batch))
        .route("/api/batch/{id}/audit", post(audit))
        .route("/api/export", get(export))
        .route("/api/triplet/{id}/frames", get(frames))
        .route("/api/{*rest}", get(not_found).post(not_found))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until Ctrl-C, then writes a final snapshot.
pub async fn serve(state: Shared, bind: &str, ui_dir: Option<PathBuf>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| crate::FmfError::Config(format!("cannot bind {bind}: {e}")))?;
    tracing::info!(addr = %bind, "annotation service listening");
    axum::serve(listener, router(state.clone(), ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| crate::FmfError::io(PathBuf::from(bind), e))?;
    state.store.read().expect("store lock").write_snapshot()
}
