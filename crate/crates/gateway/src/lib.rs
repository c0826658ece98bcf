//! HTTP and WebSocket service over the tabletop simulator and the plan
//! orchestrator.
//!
//! Each session owns one scene. Calls on a session are serialized by its
//! lock, every executed call is appended to the session history, and each
//! recorded time step is pushed to the session's stream subscribers.

pub mod api;
pub mod error;
pub mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use steer_core::orchestrator::{Planner, PlannerMemory, RemotePlanner, ScriptedPlanner};

pub use api::router;
pub use error::{ApiError, ApiResult, ErrorBody};
pub use session::{
    read_session_file, replay, session_file, CallSource, HistoryEntry, OutcomeSummary, RecordedSession, Session,
    SessionError, SessionHeader, StreamEvent,
};

use axum::http::StatusCode;

#[derive(Debug, Clone, Default)]
pub struct GatewayConfig {
    /// Directory for session files and the planner memory file.
    pub persist_dir: Option<PathBuf>,
    /// Base URL of an external planner, used by `planner: "remote"`.
    pub planner_url: Option<String>,
    pub planner_timeout: Option<Duration>,
}

impl GatewayConfig {
    /// Reads the planner settings from `STEER_PLANNER_URL` and
    /// `STEER_PLANNER_TIMEOUT_S`.
    pub fn with_planner_env(mut self) -> Self {
        self.planner_url = std::env::var("STEER_PLANNER_URL").ok().filter(|s| !s.is_empty());
        self.planner_timeout = std::env::var("STEER_PLANNER_TIMEOUT_S")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|s| *s > 0.0)
            .map(Duration::from_secs_f64);
        self
    }
}

pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    pub memory: Arc<PlannerMemory>,
    config: GatewayConfig,
    next_id: AtomicU64,
    scripted: Arc<ScriptedPlanner>,
}

impl AppState {
    pub fn new(config: GatewayConfig) -> std::io::Result<Self> {
        let memory = match &config.persist_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                PlannerMemory::open(&dir.join("memory.jsonl"))?
            }
            None => PlannerMemory::new(),
        };
        Ok(Self {
            sessions: RwLock::new(HashMap::new()),
            memory: Arc::new(memory),
            config,
            next_id: AtomicU64::new(1),
            scripted: Arc::new(ScriptedPlanner::canonical()),
        })
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn create_session(&self, scenario: &str, seed: u64) -> Result<Arc<Session>, SessionError> {
        let id = loop {
            let n = self.next_id.fetch_add(1, Ordering::Relaxed);
            let id = format!("s{:x}-{n}", session::now_ms());
            let taken = self.config.persist_dir.as_ref().is_some_and(|d| session_file(d, &id).exists());
            if !taken {
                break id;
            }
        };
        let session = Arc::new(Session::create(id.clone(), scenario, seed, self.config.persist_dir.as_deref())?);
        self.sessions.write().expect("session map").insert(id, session.clone());
        Ok(session)
    }

    pub fn session(&self, id: &str) -> ApiResult<Arc<Session>> {
        self.sessions
            .read()
            .expect("session map")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session"))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map").keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn planner(&self, name: &str) -> ApiResult<Arc<dyn Planner>> {
        match name {
            "scripted" => Ok(self.scripted.clone()),
            "remote" => {
                let url = self.config.planner_url.as_deref().ok_or_else(|| {
                    ApiError::new(
                        StatusCode::SERVICE_UNAVAILABLE,
                        "planner_unavailable",
                        "no remote planner configured",
                    )
                })?;
                let timeout = self
                    .config
                    .planner_timeout
                    .unwrap_or(Duration::from_secs(steer_core::orchestrator::planner::DEFAULT_TIMEOUT_S));
                Ok(Arc::new(RemotePlanner::new(url, timeout)))
            }
            other => Err(ApiError::bad_request(format!("unknown planner {other:?}; expected scripted or remote"))),
        }
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: GatewayConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(listener, config).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, config: GatewayConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config)?);
    axum::serve(listener, router(state)).await
}
