//! Route handlers.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use steer_core::geometry::{build_anchor_set, AnchorRecord};
use steer_core::orchestrator::{
    parse_plan, propose_plan, validate_plan, PlannerError, PlannerMemoryEntry, PlannerRequest, Proposal,
    ValidationReport,
};
use steer_core::sim::{scenario_names, SceneState};
use steer_core::skill::{SkillCall, SkillCallWire};
use steer_core::trajectory::SkillKind;
use tokio::sync::broadcast::error::RecvError;

use crate::error::{ApiError, ApiResult};
use crate::session::{CallSource, HistoryEntry, Session, SessionError, StreamEvent};
use crate::AppState;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/skills", get(list_skills))
        .route("/anchors", get(list_anchors))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/skill", post(post_skill))
        .route("/sessions/{id}/plan", post(post_plan))
        .route("/sessions/{id}/history", get(get_history))
        .route("/sessions/{id}/outcome", post(post_outcome))
        .route("/sessions/{id}/planner-request", post(post_planner_request))
        .route("/sessions/{id}/stream", get(stream))
        .fallback(|| async { ApiError::not_found("route") })
        .with_state(state)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    let text = if body.iter().all(u8::is_ascii_whitespace) { &b"{}"[..] } else { &body[..] };
    serde_json::from_slice(text).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
}

async fn list_scenarios() -> Json<Vec<&'static str>> {
    Json(scenario_names())
}

#[derive(Serialize)]
struct SkillInfo {
    name: SkillKind,
    modifiers: &'static [&'static str],
}

/// Skill names and their allowed modifiers, for building valid calls.
async fn list_skills() -> Json<Vec<SkillInfo>> {
    Json(
        SkillKind::ALL
            .into_iter()
            .map(|k| SkillInfo {
                name: k,
                modifiers: k.allowed_modifiers(),
            })
            .collect(),
    )
}

async fn list_anchors() -> Json<Vec<AnchorRecord>> {
    Json(build_anchor_set().iter().map(AnchorRecord::from).collect())
}

#[derive(Deserialize)]
struct CreateSession {
    scenario: String,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct SessionView {
    session_id: String,
    scenario: String,
    seed: u64,
    created_at: u64,
    seq: u64,
    history_len: usize,
    scene: SceneState,
}

async fn view(session: &Session) -> SessionView {
    let inner = session.inner.lock().await;
    SessionView {
        session_id: session.header.session_id.clone(),
        scenario: session.header.scenario.clone(),
        seed: session.header.seed,
        created_at: session.header.created_at,
        seq: inner.seq,
        history_len: inner.history.len(),
        scene: inner.scene.clone(),
    }
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let req: CreateSession = parse_body(&body)?;
    let session = state.create_session(&req.scenario, req.seed).map_err(|e| match e {
        SessionError::Sim(e) => ApiError::new(StatusCode::BAD_REQUEST, "unknown_scenario", e.to_string())
            .with_detail(json!({ "known": scenario_names() })),
        other => internal(other),
    })?;
    Ok((StatusCode::CREATED, Json(view(&session).await)).into_response())
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(state.session_ids())
}

async fn get_state(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    let session = state.session(&id)?;
    Ok(Json(view(&session).await))
}

async fn post_skill(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<HistoryEntry>> {
    let session = state.session(&id)?;
    let wire: SkillCallWire = parse_body(&body)?;
    let call = SkillCall::try_from(wire)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_call", e.to_string()))?;
    let mut inner = session.inner.lock().await;
    match session.run_call(&mut inner, &call, CallSource::Skill).map_err(internal)? {
        Ok(record) => Ok(Json(record)),
        Err(rejected) => Err(ApiError::new(StatusCode::CONFLICT, "rejected", rejected.reason.clone())
            .with_detail(json!({ "call": rejected.call, "instruction": rejected.instruction }))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
enum PlanMode {
    #[default]
    ValidateOnly,
    Execute,
}

#[derive(Deserialize)]
struct PlanRequest {
    program: String,
    #[serde(default)]
    mode: PlanMode,
}

#[derive(Serialize)]
struct PlanResponse {
    mode: PlanMode,
    calls: Vec<SkillCall>,
    instructions: Vec<String>,
    report: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<HistoryEntry>>,
    /// Plan index of the call that failed, when execution stopped early.
    #[serde(skip_serializing_if = "Option::is_none")]
    halted_at: Option<usize>,
}

async fn post_plan(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<PlanResponse>> {
    let session = state.session(&id)?;
    let req: PlanRequest = parse_body(&body)?;
    let plan = parse_plan(&req.program).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()).with_detail(&e)
    })?;
    let mut inner = session.inner.lock().await;
    let report = validate_plan(&plan, &inner.scene);
    let mut response = PlanResponse {
        mode: req.mode,
        calls: plan.calls.clone(),
        instructions: plan.calls.iter().map(SkillCall::render_language).collect(),
        report,
        entries: None,
        halted_at: None,
    };
    if req.mode == PlanMode::ValidateOnly {
        return Ok(Json(response));
    }
    if !response.report.is_ok() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "validation_failed",
            response.report.error_text(),
        )
        .with_detail(&response.report));
    }
    let mut entries = Vec::new();
    for (i, call) in plan.calls.iter().enumerate() {
        match session.run_call(&mut inner, call, CallSource::Plan).map_err(internal)? {
            Ok(record) => {
                let ok = record.entry.success;
                entries.push(record);
                if !ok {
                    response.halted_at = Some(i);
                    break;
                }
            }
            Err(rejected) => {
                entries.push(HistoryEntry {
                    index: rejected.index,
                    source: CallSource::Plan,
                    entry: rejected,
                });
                response.halted_at = Some(i);
                break;
            }
        }
    }
    inner.last_program = Some(plan.source_text.clone());
    response.entries = Some(entries);
    Ok(Json(response))
}

async fn get_history(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<serde_json::Value>> {
    let session = state.session(&id)?;
    let inner = session.inner.lock().await;
    Ok(Json(json!({
        "session_id": session.header.session_id,
        "scenario": session.header.scenario,
        "seed": session.header.seed,
        "entries": inner.history,
    })))
}

#[derive(Deserialize)]
struct OutcomeRequest {
    task: String,
    succeeded: bool,
}

async fn post_outcome(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<PlannerMemoryEntry>> {
    let session = state.session(&id)?;
    let req: OutcomeRequest = parse_body(&body)?;
    let program = session.inner.lock().await.last_program.clone().ok_or_else(|| {
        ApiError::new(StatusCode::CONFLICT, "no_executed_plan", "this session has not executed a plan")
    })?;
    let entry = state.memory.record(&req.task, &program, req.succeeded).map_err(internal)?;
    Ok(Json(entry))
}

#[derive(Deserialize)]
struct PlannerRequestBody {
    task: String,
    /// `scripted` or `remote`; without one only the request is built.
    #[serde(default)]
    planner: Option<String>,
    #[serde(default)]
    examples: Option<usize>,
}

#[derive(Serialize)]
struct PlannerRequestResponse {
    request: PlannerRequest,
    #[serde(skip_serializing_if = "Option::is_none")]
    proposal: Option<Proposal>,
}

async fn post_planner_request(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<PlannerRequestResponse>> {
    let session = state.session(&id)?;
    let req: PlannerRequestBody = parse_body(&body)?;
    let scene = session.inner.lock().await.scene.clone();
    let k = req.examples.unwrap_or(steer_core::orchestrator::planner::DEFAULT_EXAMPLES);
    let request = PlannerRequest::new(&req.task, &scene, Some(&state.memory), k);
    let proposal = match req.planner.as_deref() {
        None => None,
        Some(name) => {
            let planner = state.planner(name)?;
            let r = request.clone();
            let proposal = tokio::task::spawn_blocking(move || {
                propose_plan(planner.as_ref(), &r, &scene, steer_core::orchestrator::planner::DEFAULT_RETRIES)
            })
            .await
            .map_err(internal)?
            .map_err(|e| {
                let status = match e {
                    PlannerError::Unreachable(_) => StatusCode::BAD_GATEWAY,
                    _ => StatusCode::UNPROCESSABLE_ENTITY,
                };
                ApiError::new(status, "planner_failed", e.to_string())
            })?;
            Some(proposal)
        }
    };
    Ok(Json(PlannerRequestResponse { request, proposal }))
}

async fn stream(
    ws: WebSocketUpgrade,
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let session = state.session(&id)?;
    // Snapshot and subscription under one lock: no event can fall between them.
    let (snapshot, rx) = {
        let inner = session.inner.lock().await;
        (
            StreamEvent::Snapshot {
                seq: inner.seq,
                scene: inner.scene.clone(),
            },
            session.subscribe(),
        )
    };
    Ok(ws.on_upgrade(move |socket| pump(socket, snapshot, rx)))
}

fn frame(value: &impl Serialize) -> Message {
    Message::Text(serde_json::to_string(value).expect("serializable").into())
}

async fn pump(mut socket: WebSocket, snapshot: StreamEvent, mut rx: tokio::sync::broadcast::Receiver<StreamEvent>) {
    if socket.send(frame(&snapshot)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            event = rx.recv() => match event {
                Ok(e) => {
                    if socket.send(frame(&e)).await.is_err() {
                        return;
                    }
                }
                Err(RecvError::Lagged(n)) => {
                    let body = ApiError::new(StatusCode::GONE, "stream_lagged", format!("subscriber fell {n} events behind")).body;
                    let _ = socket.send(frame(&json!({ "type": "error", "error": body }))).await;
                    let _ = socket.send(Message::Close(None)).await;
                    return;
                }
                Err(RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
