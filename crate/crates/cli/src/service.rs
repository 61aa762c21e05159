//! HTTP JSON service. Reads run against the last committed snapshot; writes
//! go through one writer slot and fail fast with `busy` when it is taken.

use std::sync::{Arc, Mutex, MutexGuard, RwLock, TryLockError};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use crmcat_core::serialization::{export_turtle, ExportScope};
use crmcat_core::{Catalog, Graph, Iri, Profile};
use serde::{Deserialize, Serialize};

use crate::envelope::{AppError, Envelope, ErrorKind};
use crate::ops::{self, ReportKind, TosecBatch, TraverseRequest, Workflow};

pub struct AppState {
    writer: Mutex<Catalog>,
    snapshot: RwLock<Arc<Graph>>,
}

impl AppState {
    pub fn new(catalog: Catalog) -> Arc<AppState> {
        Arc::new(AppState {
            snapshot: RwLock::new(catalog.snapshot()),
            writer: Mutex::new(catalog),
        })
    }

    pub fn snapshot(&self) -> Arc<Graph> {
        Arc::clone(&self.snapshot.read().unwrap_or_else(|e| e.into_inner()))
    }

    /// Blocks until the writer slot is free. Requests arriving meanwhile
    /// are answered `busy`.
    pub fn hold_writer(&self) -> MutexGuard<'_, Catalog> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn write<T>(&self, f: impl FnOnce(&mut Catalog) -> Result<T, AppError>) -> Result<T, AppError> {
        let mut cat = match self.writer.try_lock() {
            Ok(guard) => guard,
            Err(TryLockError::WouldBlock) => return Err(AppError::busy()),
            Err(TryLockError::Poisoned(e)) => e.into_inner(),
        };
        let out = f(&mut cat);
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = cat.snapshot();
        out
    }
}

fn status(kind: ErrorKind) -> StatusCode {
    match kind {
        ErrorKind::Usage => StatusCode::BAD_REQUEST,
        ErrorKind::NotFound => StatusCode::NOT_FOUND,
        ErrorKind::Busy => StatusCode::CONFLICT,
        ErrorKind::Domain => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        (status(self.kind), Json(Envelope::<()>::failure(self.body))).into_response()
    }
}

type ApiResult = Result<Response, AppError>;

fn ok<T: Serialize>(data: T) -> ApiResult {
    Ok(Json(Envelope::success(data)).into_response())
}

fn created<T: Serialize>(data: T) -> ApiResult {
    Ok((StatusCode::CREATED, Json(Envelope::success(data))).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/workflows/{name}", post(run_workflow))
        .route("/api/tosec", post(tosec_batch))
        .route("/api/entity", get(entity))
        .route("/api/search", get(search))
        .route("/api/traverse", post(traverse))
        .route("/api/reports/{kind}", get(report))
        .route("/api/audit", get(audit))
        .route("/api/export", get(export))
        .fallback(|| async { AppError::new(ErrorKind::NotFound, "not-found", "no such endpoint") })
        .with_state(state)
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    profile: Profile,
    entities: usize,
    statements: usize,
    activities: usize,
}

async fn health(State(state): State<Arc<AppState>>) -> ApiResult {
    let g = state.snapshot();
    ok(Health {
        status: "ok",
        profile: g.profile(),
        entities: g.entity_count(),
        statements: g.statements().len(),
        activities: g.activities().len(),
    })
}

async fn run_workflow(State(state): State<Arc<AppState>>, Path(name): Path<String>, body: Bytes) -> ApiResult {
    let workflow = Workflow::from_json(&name, &body)?;
    created(state.write(|cat| workflow.run(cat))?)
}

async fn tosec_batch(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let batch: TosecBatch = serde_json::from_slice(&body).map_err(|e| AppError::bad_body(&e))?;
    ok(state.write(|cat| Ok(ops::ingest(cat, &batch)))?)
}

#[derive(Deserialize)]
struct EntityQuery {
    iri: String,
    direction: Option<String>,
    property: Option<String>,
}

async fn entity(State(state): State<Arc<AppState>>, Query(q): Query<EntityQuery>) -> ApiResult {
    let direction = ops::parse_direction(q.direction.as_deref())?;
    let g = state.snapshot();
    ok(ops::neighborhood(&g, &Iri::new(q.iri), direction, q.property.as_deref())?)
}

#[derive(Deserialize)]
struct SearchQuery {
    identifier: Option<String>,
    #[serde(rename = "type")]
    type_label: Option<String>,
    class: Option<String>,
}

async fn search(State(state): State<Arc<AppState>>, Query(q): Query<SearchQuery>) -> ApiResult {
    if q.identifier.is_none() && q.type_label.is_none() {
        return Err(AppError::usage("give identifier or type").with_field("identifier"));
    }
    let g = state.snapshot();
    ok(ops::search(&g, q.identifier.as_deref(), q.type_label.as_deref(), q.class.as_deref()))
}

async fn traverse(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: TraverseRequest = serde_json::from_slice(&body).map_err(|e| AppError::bad_body(&e))?;
    ok(ops::traverse(&state.snapshot(), &req)?)
}

#[derive(Deserialize)]
struct ReportQuery {
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
    profile: Option<String>,
}

async fn report(State(state): State<Arc<AppState>>, Path(kind): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult {
    let kind: ReportKind = kind.parse()?;
    let profile = match q.profile.as_deref() {
        Some(p) => Some(
            p.parse::<Profile>()
                .map_err(|e| AppError::usage(e.to_string()).with_field("profile"))?,
        ),
        None => None,
    };
    let g = state.snapshot();
    ok(ops::page(ops::report(&g, kind, profile), q.offset, q.limit))
}

#[derive(Deserialize)]
struct IriQuery {
    iri: String,
}

async fn audit(State(state): State<Arc<AppState>>, Query(q): Query<IriQuery>) -> ApiResult {
    ok(ops::audit(&state.snapshot(), &Iri::new(q.iri))?)
}

#[derive(Deserialize)]
struct ExportQuery {
    scope: Option<String>,
}

async fn export(State(state): State<Arc<AppState>>, Query(q): Query<ExportQuery>) -> ApiResult {
    let scope: ExportScope = q
        .scope
        .as_deref()
        .unwrap_or("live")
        .parse()
        .map_err(|_| AppError::usage("scope must be live or full").with_field("scope"))?;
    let text = export_turtle(&state.snapshot(), scope);
    Ok((
        [
            (header::CONTENT_TYPE, "text/turtle; charset=utf-8"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"catalog.ttl\""),
        ],
        text,
    )
        .into_response())
}

/// Serves until interrupted.
pub async fn serve(listen: &str, catalog: Catalog) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    eprintln!("crmcat listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(catalog)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
