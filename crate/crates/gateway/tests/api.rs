use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use steer_gateway::{read_session_file, router, session_file, AppState, GatewayConfig};
use tower::ServiceExt;

const POUR: &str = r#"grasp("pink cup", "side")
lift("pink cup")
reorient("pink cup", "to_horizontal")
reorient("pink cup", "to_upright")
place("pink cup")
"#;

fn app() -> Router {
    router(Arc::new(AppState::new(GatewayConfig::default()).unwrap()))
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(b) => Body::from(b.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn new_session(app: &Router, scenario: &str) -> String {
    let (status, body) = send(app, "POST", "/sessions", Some(json!({ "scenario": scenario, "seed": 3 }))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn catalog_endpoints() {
    let app = app();
    let (s, anchors) = send(&app, "GET", "/anchors", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(anchors.as_array().unwrap().len(), 26);
    let (_, skills) = send(&app, "GET", "/skills", None).await;
    assert_eq!(skills.as_array().unwrap().len(), 4);
    let (_, scenarios) = send(&app, "GET", "/scenarios", None).await;
    assert!(scenarios.as_array().unwrap().contains(&json!("single_cup")));
}

#[tokio::test]
async fn session_lifecycle_and_errors() {
    let app = app();
    let id = new_session(&app, "single_cup").await;
    let (s, state) = send(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(state["scenario"], "single_cup");
    assert!(state["scene"]["objects"]["pink cup"].is_object());

    let (_, ids) = send(&app, "GET", "/sessions", None).await;
    assert_eq!(ids, json!([id]));

    let (s, err) = send(&app, "POST", "/sessions", Some(json!({ "scenario": "moon" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "unknown_scenario");

    let (s, err) = send(&app, "GET", "/sessions/nope/state", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");

    let req = Request::builder()
        .method("POST")
        .uri(format!("/sessions/{id}/skill"))
        .body(Body::from("{not json"))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::BAD_REQUEST);

    let (s, err) = send(&app, "GET", "/nowhere", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");
}

#[tokio::test]
async fn rejected_skill_leaves_state_unchanged() {
    let app = app();
    let id = new_session(&app, "single_cup").await;
    let (_, before) = send(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let (s, err) = send(&app, "POST", &format!("/sessions/{id}/skill"), Some(json!({ "name": "lift", "object": "pink cup" }))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(err["code"], "rejected");
    let (_, after) = send(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(before, after);

    let (s, err) = send(
        &app,
        "POST",
        &format!("/sessions/{id}/skill"),
        Some(json!({ "name": "grasp", "object": "pink cup", "modifier": "sideways" })),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid_call");

    let (s, ok) = send(
        &app,
        "POST",
        &format!("/sessions/{id}/skill"),
        Some(json!({ "name": "grasp", "object": "pink cup", "modifier": "side" })),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{ok}");
    assert_eq!(ok["index"], 0);
    assert_eq!(ok["entry"]["success"], true);
    assert_eq!(ok["entry"]["scene"]["objects"]["pink cup"]["held"], true);
}

#[tokio::test]
async fn plan_validate_and_execute() {
    let app = app();
    let id = new_session(&app, "single_cup").await;
    let uri = format!("/sessions/{id}/plan");

    let (s, v) = send(&app, "POST", &uri, Some(json!({ "program": POUR }))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["mode"], "validate_only");
    assert_eq!(v["calls"].as_array().unwrap().len(), 5);
    assert_eq!(v["instructions"][0], "grasp the pink cup in a side grasp");
    assert!(v["report"]["errors"].as_array().unwrap().is_empty());
    let (_, hist) = send(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    assert!(hist["entries"].as_array().unwrap().is_empty());

    let (s, err) = send(&app, "POST", &uri, Some(json!({ "program": "grasp(\"pink cup\", \"side\"\n" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], "parse_error");
    assert_eq!(err["detail"]["code"], "syntax");
    assert!(err["detail"]["line"].as_u64().unwrap() >= 1);

    let (s, err) = send(&app, "POST", &uri, Some(json!({ "program": "lift(\"pink cup\")", "mode": "execute" }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "validation_failed");
    assert_eq!(err["detail"]["errors"][0]["code"], "order_violation");

    let (s, v) = send(&app, "POST", &uri, Some(json!({ "program": POUR, "mode": "execute" }))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    assert!(entries.iter().all(|e| e["entry"]["success"] == true && e["source"] == "plan"));
    assert!(v.get("halted_at").is_none());
    let (_, hist) = send(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    let indices: Vec<u64> = hist["entries"].as_array().unwrap().iter().map(|e| e["index"].as_u64().unwrap()).collect();
    assert_eq!(indices, vec![0, 1, 2, 3, 4]);
}

#[tokio::test]
async fn forbidden_grasp_is_recorded_as_failure() {
    let app = app();
    let id = new_session(&app, "potted_plant").await;
    let (s, v) = send(
        &app,
        "POST",
        &format!("/sessions/{id}/plan"),
        Some(json!({ "program": "grasp(\"flower pot\", \"top-down\")\nlift(\"flower pot\")", "mode": "execute" })),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["halted_at"], 0);
    assert_eq!(v["entries"][0]["entry"]["success"], false);
    assert!(!v["entries"][0]["entry"]["reason"].as_str().unwrap().is_empty());
}

#[tokio::test]
async fn outcome_feeds_planner_examples() {
    let app = app();
    let id = new_session(&app, "single_cup").await;
    let task = "pour from the pink cup";
    let (s, err) = send(&app, "POST", &format!("/sessions/{id}/outcome"), Some(json!({ "task": task, "succeeded": true }))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(err["code"], "no_executed_plan");

    let (s, _) = send(&app, "POST", &format!("/sessions/{id}/plan"), Some(json!({ "program": POUR, "mode": "execute" }))).await;
    assert_eq!(s, StatusCode::OK);
    let (s, entry) = send(&app, "POST", &format!("/sessions/{id}/outcome"), Some(json!({ "task": task, "succeeded": true }))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(entry["program"], POUR);

    let other = new_session(&app, "single_cup").await;
    let (s, v) = send(&app, "POST", &format!("/sessions/{other}/planner-request"), Some(json!({ "task": task }))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["request"]["examples"], json!([POUR]));
    assert!(v["request"]["system_prompt"].as_str().unwrap().contains("grasp"));
    assert!(v["request"]["scene_summary"].as_str().unwrap().contains("pink cup"));
    assert!(v.get("proposal").is_none());
}

#[tokio::test]
async fn planner_selection() {
    let app = app();
    let id = new_session(&app, "stacked").await;
    let uri = format!("/sessions/{id}/planner-request");
    let (s, v) = send(
        &app,
        "POST",
        &uri,
        Some(json!({ "task": "unstack the cups and set the top cup upright", "planner": "scripted" })),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["proposal"]["plan"]["calls"].as_array().unwrap().len(), 4);
    assert_eq!(v["proposal"]["attempts"], 1);

    let (s, err) = send(&app, "POST", &uri, Some(json!({ "task": "juggle", "planner": "scripted" }))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "planner_failed");

    let (s, err) = send(&app, "POST", &uri, Some(json!({ "task": "juggle", "planner": "remote" }))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(err["code"], "planner_unavailable");

    let (s, _) = send(&app, "POST", &uri, Some(json!({ "task": "juggle", "planner": "oracle" }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn persisted_session_replays_to_same_scene() {
    let dir = tempfile::tempdir().unwrap();
    let config = GatewayConfig {
        persist_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let state = Arc::new(AppState::new(config.clone()).unwrap());
    let app = router(state.clone());
    let id = new_session(&app, "single_cup").await;
    send(&app, "POST", &format!("/sessions/{id}/skill"), Some(json!({ "name": "grasp", "object": "pink cup", "modifier": "side" }))).await;
    send(&app, "POST", &format!("/sessions/{id}/skill"), Some(json!({ "name": "lift", "object": "pink cup" }))).await;
    send(&app, "POST", &format!("/sessions/{id}/skill"), Some(json!({ "name": "place", "object": "pink cup" }))).await;
    send(&app, "POST", &format!("/sessions/{id}/plan"), Some(json!({ "program": POUR, "mode": "execute" }))).await;
    send(&app, "POST", &format!("/sessions/{id}/outcome"), Some(json!({ "task": "pour", "succeeded": true }))).await;
    let (_, live) = send(&app, "GET", &format!("/sessions/{id}/state"), None).await;

    let recorded = read_session_file(&session_file(dir.path(), &id)).unwrap();
    assert_eq!(recorded.header.seed, 3);
    assert_eq!(recorded.history.len(), 8);
    let replayed = recorded.replay().unwrap();
    assert_eq!(serde_json::to_value(&replayed).unwrap(), live["scene"]);

    // Planner memory survives a restart.
    drop(app);
    drop(state);
    let restarted = AppState::new(config).unwrap();
    assert_eq!(restarted.memory.retrieve("pour", 3), vec![POUR.to_string()]);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_calls_are_serialized() {
    let app = app();
    let id = new_session(&app, "clutter").await;
    let (_, state) = send(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let objects: Vec<String> = state["scene"]["objects"].as_object().unwrap().keys().cloned().collect();

    let mut tasks = Vec::new();
    for i in 0..24 {
        let app = app.clone();
        let uri = format!("/sessions/{id}/skill");
        let object = objects[i % objects.len()].clone();
        tasks.push(tokio::spawn(async move {
            let call = match i % 3 {
                0 => json!({ "name": "grasp", "object": object, "modifier": "top-down" }),
                1 => json!({ "name": "lift", "object": object }),
                _ => json!({ "name": "place", "object": object }),
            };
            send(&app, "POST", &uri, Some(call)).await.0
        }));
    }
    let mut accepted = 0;
    for t in tasks {
        let status = t.await.unwrap();
        assert!(status == StatusCode::OK || status == StatusCode::CONFLICT, "{status}");
        accepted += (status == StatusCode::OK) as usize;
    }
    let (_, hist) = send(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    let entries = hist["entries"].as_array().unwrap();
    assert_eq!(entries.len(), accepted);
    for (i, e) in entries.iter().enumerate() {
        assert_eq!(e["index"], i);
    }
    // The history replays to the live scene, so no two calls interleaved.
    let calls: Vec<steer_core::skill::SkillCall> =
        entries.iter().map(|e| serde_json::from_value(e["entry"]["call"].clone()).unwrap()).collect();
    let replayed = steer_gateway::replay("clutter", 3, &calls).unwrap();
    let (_, live) = send(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!(serde_json::to_value(&replayed).unwrap(), live["scene"]);
}
