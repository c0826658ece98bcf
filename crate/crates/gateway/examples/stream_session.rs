//! Drive a session over HTTP while watching its event stream.
//!
//! Starts the service on an ephemeral port, subscribes to the stream,
//! executes the pour plan and prints every event as it arrives.
//!
//! ```text
//! cargo run -p steer-gateway --example stream_session
//! ```

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use futures_util::StreamExt;
use serde_json::{json, Value};
use steer_gateway::{router, AppState, GatewayConfig, StreamEvent};
use tokio_tungstenite::connect_async;
use tower::ServiceExt;

const POUR: &str = "grasp(\"pink cup\", \"side\")\nlift(\"pink cup\")\nreorient(\"pink cup\", \"to_horizontal\")\nreorient(\"pink cup\", \"to_upright\")\nplace(\"pink cup\")\n";

async fn post(app: &axum::Router, uri: &str, body: Value) -> Result<Value, Box<dyn std::error::Error>> {
    let req = Request::post(uri).header("content-type", "application/json").body(Body::from(body.to_string()))?;
    let res = app.clone().oneshot(req).await?;
    Ok(serde_json::from_slice(&axum::body::to_bytes(res.into_body(), usize::MAX).await?)?)
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let app = router(Arc::new(AppState::new(GatewayConfig::default())?));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let served = app.clone();
    tokio::spawn(async move { axum::serve(listener, served).await });

    let session = post(&app, "/sessions", json!({ "scenario": "single_cup", "seed": 0 })).await?;
    let id = session["session_id"].as_str().ok_or("no session id")?.to_string();
    let (mut ws, _) = connect_async(format!("ws://{addr}/sessions/{id}/stream")).await?;

    let plan = post(&app, &format!("/sessions/{id}/plan"), json!({ "program": POUR, "mode": "execute" })).await?;
    let calls = plan["entries"].as_array().map_or(0, Vec::len);

    let mut finished = 0;
    while let Some(msg) = ws.next().await {
        let msg = msg?;
        if !msg.is_text() {
            continue;
        }
        match serde_json::from_str::<StreamEvent>(msg.to_text()?)? {
            StreamEvent::Snapshot { seq, scene } => println!("snapshot at seq {seq}: {} objects", scene.objects.len()),
            StreamEvent::Step { seq, step, outcome, .. } => {
                if let Some(o) = outcome {
                    println!("seq {seq:>3}: {} -> success={}", o.instruction, o.success);
                    finished += 1;
                    if finished == calls {
                        break;
                    }
                } else if seq % 10 == 0 {
                    let p = step.ee_position;
                    println!("seq {seq:>3}: ee at ({:.3}, {:.3}, {:.3}) aperture {:.2}", p.x, p.y, p.z, step.gripper_aperture);
                }
            }
        }
    }
    let outcome = post(&app, &format!("/sessions/{id}/outcome"), json!({ "task": "pour from the pink cup", "succeeded": true })).await?;
    println!("stored in planner memory: {}", outcome["task"]);
    Ok(())
}
