//! HTTP API over a case directory.
//!
//! Reads load the case file fresh, so they always see the last committed
//! write. Writes take a per-case lock; a writer that cannot get it within
//! the timeout receives 503 with `Retry-After`.

use std::collections::HashMap;
use std::net::IpAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::OwnedMutexGuard;
use tower_http::services::ServeDir;

use cryptarg_core::case::{build_framework, parse_case};
use cryptarg_core::scheme::catalog;
use cryptarg_core::{Answer, CaseError, CaseSession, EvalOptions, SchemeError};

use crate::store::{CaseStore, StoreError};
use crate::views::{cluster_view, cq_rows, CqFilter};
use crate::CliError;

pub const DEFAULT_WRITE_TIMEOUT: Duration = Duration::from_secs(5);

/// A REST route and the subcommand that offers the same capability.
#[derive(Debug, Clone, Copy)]
pub struct Route {
    pub method: &'static str,
    pub path: &'static str,
    pub cli: &'static str,
}

pub const ROUTES: &[Route] = &[
    Route {
        method: "GET",
        path: "/api/cases",
        cli: "cases",
    },
    Route {
        method: "POST",
        path: "/api/cases",
        cli: "ingest",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}",
        cli: "show",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}/clusters",
        cli: "cluster",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}/arguments",
        cli: "arguments",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}/framework",
        cli: "export-af",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}/evaluation",
        cli: "evaluate",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}/cqs",
        cli: "cq list",
    },
    Route {
        method: "POST",
        path: "/api/cases/{id}/arguments/{arg}/cqs/{cq}/answer",
        cli: "cq answer",
    },
    Route {
        method: "POST",
        path: "/api/cases/{id}/auto-instantiate",
        cli: "auto-args",
    },
    Route {
        method: "GET",
        path: "/api/cases/{id}/report",
        cli: "report",
    },
    Route {
        method: "GET",
        path: "/api/schemes",
        cli: "schemes",
    },
];

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub case_dir: PathBuf,
    pub host: IpAddr,
    pub port: u16,
    pub ui_dir: Option<PathBuf>,
    pub write_timeout: Duration,
}

#[derive(Clone)]
pub struct AppState {
    store: CaseStore,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
    write_timeout: Duration,
}

impl AppState {
    pub fn new(case_dir: impl Into<PathBuf>, write_timeout: Duration) -> Self {
        Self {
            store: CaseStore::new(case_dir),
            locks: Arc::default(),
            write_timeout,
        }
    }

    /// The writer lock of one case. Exposed so callers can hold it.
    pub fn writer_lock(&self, case_id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(case_id.to_owned()).or_default().clone()
    }

    async fn write_guard(&self, case_id: &str) -> Result<OwnedMutexGuard<()>, ApiError> {
        let lock = self.writer_lock(case_id);
        tokio::time::timeout(self.write_timeout, lock.lock_owned())
            .await
            .map_err(|_| ApiError::busy(case_id))
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn busy(case_id: &str) -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            format!("case `{case_id}` is being modified; retry shortly"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(ErrorBody {
            error: self.message,
        });
        if self.status == StatusCode::SERVICE_UNAVAILABLE {
            (self.status, [(header::RETRY_AFTER, "1")], body).into_response()
        } else {
            (self.status, body).into_response()
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::BadId(_) => StatusCode::BAD_REQUEST,
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::Exists(_) => StatusCode::CONFLICT,
            StoreError::Case(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl From<CaseError> for ApiError {
    fn from(e: CaseError) -> Self {
        let status = match &e {
            CaseError::Scheme(
                SchemeError::ArgumentNotFound(_) | SchemeError::CqNotFound { .. },
            ) => StatusCode::NOT_FOUND,
            CaseError::Scheme(_) | CaseError::Integrity(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
struct EvalQuery {
    #[serde(default = "yes")]
    open_assumptions_attack: bool,
}

impl EvalQuery {
    fn options(&self) -> EvalOptions {
        EvalOptions {
            open_assumptions_attack: self.open_assumptions_attack,
        }
    }
}

#[derive(Debug, Deserialize)]
struct FrameworkQuery {
    #[serde(default = "yes")]
    open_assumptions_attack: bool,
    #[serde(default)]
    format: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ClusterQuery {
    #[serde(default)]
    coinjoin_filter: Option<bool>,
}

#[derive(Debug, Deserialize)]
struct CqQuery {
    #[serde(default)]
    status: CqFilter,
}

#[derive(Debug, Deserialize)]
struct AnswerBody {
    answer: Answer,
    #[serde(default)]
    justification: String,
}

async fn list_cases(State(st): State<AppState>) -> ApiResult<Response> {
    let (good, bad) = st.store.list()?;
    for (file, e) in bad {
        eprintln!("skipping {file}: {e}");
    }
    Ok(Json(good).into_response())
}

async fn create_case(State(st): State<AppState>, body: String) -> ApiResult<Response> {
    let case =
        parse_case(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let _guard = st.write_guard(&case.case_id).await?;
    st.store.create(&case)?;
    Ok((
        StatusCode::CREATED,
        Json(crate::views::CaseSummary::of(&case)),
    )
        .into_response())
}

async fn get_case(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let s = st.store.open(&id)?;
    Ok(Json(s.into_case()).into_response())
}

async fn clusters(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<ClusterQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let mut s = st.store.open(&id)?;
    let mut params = s.case().heuristics;
    if let Some(f) = q.coinjoin_filter {
        params.apply_coinjoin_filter = f;
    }
    let view = cluster_view(s.transactions()?, &params);
    Ok(Json(view).into_response())
}

async fn arguments(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let case = st.store.open(&id)?.into_case();
    Ok(Json(case.arguments).into_response())
}

async fn framework(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<FrameworkQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let s = st.store.open(&id)?;
    let opts = EvalOptions {
        open_assumptions_attack: q.open_assumptions_attack,
    };
    let af = build_framework(s.case(), &opts);
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(af).into_response()),
        Some("apx") => Ok((
            [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
            af.to_apx(),
        )
            .into_response()),
        Some(other) => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("unknown format `{other}` (json or apx)"),
        )),
    }
}

async fn evaluation(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<EvalQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let mut s = st.store.open(&id)?;
    s.set_options(q.options());
    Ok(Json(s.evaluation()).into_response())
}

async fn cqs(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<CqQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let s = st.store.open(&id)?;
    Ok(Json(cq_rows(s.case(), q.status)).into_response())
}

async fn answer(
    State(st): State<AppState>,
    Path((id, arg, cq)): Path<(String, String, String)>,
    q: Result<Query<EvalQuery>, QueryRejection>,
    body: Result<Json<AnswerBody>, JsonRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let Json(body) = body?;
    let _guard = st.write_guard(&id).await?;
    let mut s: CaseSession = st.store.open(&id)?;
    s.set_options(q.options());
    s.answer_cq(&arg, &cq, body.answer, &body.justification)?;
    st.store.save(&id, &s)?;
    Ok(Json(s.evaluation()).into_response())
}

#[derive(Serialize)]
struct Created {
    created: Vec<cryptarg_core::Argument>,
}

async fn auto_instantiate(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let _guard = st.write_guard(&id).await?;
    let mut s = st.store.open(&id)?;
    let created = s.auto_instantiate()?;
    if !created.is_empty() {
        st.store.save(&id, &s)?;
    }
    Ok(Json(Created { created }).into_response())
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    #[serde(default = "yes")]
    open_assumptions_attack: bool,
    #[serde(default)]
    format: Option<String>,
}

async fn report(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: Result<Query<ReportQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = q?;
    let mut s = st.store.open(&id)?;
    s.set_options(EvalOptions {
        open_assumptions_attack: q.open_assumptions_attack,
    });
    let report = s.report()?;
    match q.format.as_deref() {
        None | Some("json") => Ok(Json(report).into_response()),
        Some("md") => Ok((
            [(header::CONTENT_TYPE, "text/markdown; charset=utf-8")],
            report.to_markdown(),
        )
            .into_response()),
        Some(other) => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("unknown format `{other}` (json or md)"),
        )),
    }
}

async fn schemes() -> Response {
    Json(catalog()).into_response()
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such route")
}

pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/cases", get(list_cases).post(create_case))
        .route("/api/cases/{id}", get(get_case))
        .route("/api/cases/{id}/clusters", get(clusters))
        .route("/api/cases/{id}/arguments", get(arguments))
        .route("/api/cases/{id}/framework", get(framework))
        .route("/api/cases/{id}/evaluation", get(evaluation))
        .route("/api/cases/{id}/cqs", get(cqs))
        .route(
            "/api/cases/{id}/arguments/{arg}/cqs/{cq}/answer",
            post(answer),
        )
        .route("/api/cases/{id}/auto-instantiate", post(auto_instantiate))
        .route("/api/cases/{id}/report", get(report))
        .route("/api/schemes", get(schemes))
        .route("/api", get(not_found))
        .route("/api/{*rest}", get(not_found).post(not_found))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

pub async fn bind(opts: &ServeOptions) -> Result<TcpListener, CliError> {
    TcpListener::bind((opts.host, opts.port))
        .await
        .map_err(|source| CliError::Bind {
            addr: format!("{}:{}", opts.host, opts.port),
            source,
        })
}

pub async fn serve(listener: TcpListener, opts: &ServeOptions) -> Result<(), CliError> {
    let state = AppState::new(&opts.case_dir, opts.write_timeout);
    axum::serve(listener, router(state, opts.ui_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(CliError::Output)
}
