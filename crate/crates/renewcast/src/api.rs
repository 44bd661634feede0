//! Stateless HTTP service over an immutable catalog of models and scenario specs.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use renewcast_core::scenario::{ForecastModel, ScenarioError};
use renewcast_core::scoring::{
    builtin_scorecard, compute_factor, validate_scorecard, FactorKind, PolicyScorecard, Region, Violation,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::document::{evaluate, load_document, materialize, ModelLookup, ScenarioDocument, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model_file::load_model;

/// Everything the service can answer from. Built once at startup, never mutated.
#[derive(Debug, Clone, Default)]
pub struct SessionCatalog {
    models: BTreeMap<String, ForecastModel>,
    specs: BTreeMap<String, ScenarioDocument>,
}

impl ModelLookup for SessionCatalog {
    fn lookup(&self, id: &str) -> Option<&ForecastModel> {
        self.models.get(id)
    }
}

fn json_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

impl SessionCatalog {
    pub fn new(models: BTreeMap<String, ForecastModel>, specs: BTreeMap<String, ScenarioDocument>) -> Self {
        SessionCatalog { models, specs }
    }

    /// Loads every `*.json` model and spec; ids are file stems. Spec files are
    /// materialized against their directory so they can be served by value.
    pub fn load(models_dir: Option<&Path>, specs_dir: Option<&Path>) -> Result<Self> {
        let mut catalog = SessionCatalog::default();
        if let Some(dir) = models_dir {
            for (id, path) in json_files(dir)? {
                catalog.models.insert(id, load_model(&path)?);
            }
        }
        if let Some(dir) = specs_dir {
            for (id, path) in json_files(dir)? {
                catalog.specs.insert(id, materialize(&load_document(&path)?, dir)?);
            }
        }
        Ok(catalog)
    }

    pub fn models(&self) -> &BTreeMap<String, ForecastModel> {
        &self.models
    }

    pub fn specs(&self) -> &BTreeMap<String, ScenarioDocument> {
        &self.specs
    }
}

struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            kind,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, kind) = match &e {
            Error::Parse { .. } => (StatusCode::BAD_REQUEST, "malformed_request"),
            Error::UnknownModel(_) => (StatusCode::NOT_FOUND, "unknown_model"),
            Error::Scenario(ScenarioError::InfeasibleAnchor { .. }) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "infeasible_anchor")
            }
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_scenario"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind, "message": self.message },
        });
        (self.status, axum::Json(body)).into_response()
    }
}

type Reply = std::result::Result<Response, ApiError>;

fn ok_json(value: &impl Serialize) -> Reply {
    Ok(axum::Json(value).into_response())
}

/// Raw JSON text, so the bytes match what the command line writes.
fn ok_text(body: String) -> Reply {
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> std::result::Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed_request",
            "request body is empty",
        ));
    }
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed_request", e.to_string()))
}

async fn health(State(catalog): State<Arc<SessionCatalog>>) -> Reply {
    ok_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "models": catalog.models.len(),
        "specs": catalog.specs.len(),
    }))
}

async fn list_models(State(catalog): State<Arc<SessionCatalog>>) -> Reply {
    let models: Vec<Value> = catalog
        .models
        .iter()
        .map(|(id, m)| {
            json!({
                "id": id,
                "region": m.region,
                "targets": m.targets,
                "feature_ids": m.feature_ids,
                "schema": m.schema,
                "last_observed": m.last_observed,
            })
        })
        .collect();
    ok_json(&json!({ "schema_version": SCHEMA_VERSION, "models": models }))
}

async fn list_specs(State(catalog): State<Arc<SessionCatalog>>) -> Reply {
    let ids: Vec<&String> = catalog.specs.keys().collect();
    ok_json(&json!({ "schema_version": SCHEMA_VERSION, "specs": ids }))
}

async fn get_spec(State(catalog): State<Arc<SessionCatalog>>, UrlPath(id): UrlPath<String>) -> Reply {
    match catalog.specs.get(&id) {
        Some(doc) => ok_json(doc),
        None => Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_spec",
            format!("unknown spec {id:?}"),
        )),
    }
}

fn factor_body(card: &PolicyScorecard, violations: &[Violation]) -> Value {
    let factor = if violations.is_empty() {
        compute_factor(card).ok()
    } else {
        None
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "factor": factor.map(|f| f.value),
        "display": factor.map(|f| f.display()),
        "violations": violations,
    })
}

async fn list_scorecards() -> Reply {
    let cards: Vec<Value> = Region::ALL
        .iter()
        .flat_map(|r| {
            [FactorKind::Ceiling, FactorKind::Speed].map(|k| json!({ "region": r.as_str(), "kind": k.as_str() }))
        })
        .collect();
    ok_json(&json!({ "schema_version": SCHEMA_VERSION, "scorecards": cards }))
}

async fn get_scorecard(UrlPath((region, kind)): UrlPath<(String, String)>) -> Reply {
    let not_found = |what: &str| ApiError::new(StatusCode::NOT_FOUND, "unknown_scorecard", what.to_string());
    let region: Region = region
        .parse()
        .map_err(|_| not_found(&format!("unknown region {region:?}")))?;
    let kind: FactorKind = kind
        .parse()
        .map_err(|_| not_found(&format!("unknown factor kind {kind:?}")))?;
    let card = builtin_scorecard(region, kind);
    let mut body = factor_body(&card, &validate_scorecard(&card));
    body["scorecard"] = serde_json::to_value(&card).expect("scorecard serializes");
    ok_json(&body)
}

async fn post_factor(body: Bytes) -> Reply {
    let card: PolicyScorecard = parse_body(&body)?;
    ok_json(&factor_body(&card, &validate_scorecard(&card)))
}

async fn post_scenario(State(catalog): State<Arc<SessionCatalog>>, body: Bytes) -> Reply {
    let doc: ScenarioDocument = parse_body(&body)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "malformed_request",
            format!("unsupported schema_version {}", doc.schema_version),
        ));
    }
    let report = evaluate(&doc, catalog.as_ref(), None)?;
    ok_text(report.to_json())
}

pub fn router(catalog: Arc<SessionCatalog>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/models", get(list_models))
        .route("/api/specs", get(list_specs))
        .route("/api/specs/{id}", get(get_spec))
        .route("/api/scorecards", get(list_scorecards))
        .route("/api/scorecards/{region}/{kind}", get(get_scorecard))
        .route("/api/factor", post(post_factor))
        .route("/api/scenario", post(post_scenario))
        .with_state(catalog);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(catalog: SessionCatalog, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(catalog), static_dir.as_deref())).await
}
