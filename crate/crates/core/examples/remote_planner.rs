//! Plan through an HTTP planner endpoint.
//!
//! The endpoint receives the planner request as JSON and answers
//! `{"program": "..."}`. Point `STEER_PLANNER_URL` at a real service, or
//! leave it unset to use a local endpoint that answers from a fixed table.
//!
//! ```text
//! STEER_PLANNER_URL=http://localhost:9000/plan cargo run -p steer-core --example remote_planner -- "pick up the kettle"
//! ```

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use steer_core::orchestrator::planner::DEFAULT_RETRIES;
use steer_core::orchestrator::{
    propose_plan, Planner, PlannerRequest, PlannerResponse, RemotePlanner, ScriptedPlanner,
};
use steer_core::sim::SceneState;

/// Minimal single-threaded HTTP endpoint backed by the scripted table.
fn local_endpoint() -> std::io::Result<String> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let url = format!("http://{}/plan", listener.local_addr()?);
    thread::spawn(move || {
        let table = ScriptedPlanner::canonical();
        for stream in listener.incoming().flatten() {
            let mut reader = BufReader::new(&stream);
            let mut length = 0;
            let mut line = String::new();
            while reader.read_line(&mut line).is_ok_and(|n| n > 0) && line != "\r\n" {
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
                line.clear();
            }
            let mut body = vec![0; length];
            if reader.read_exact(&mut body).is_err() {
                continue;
            }
            let (status, reply) = match serde_json::from_slice::<PlannerRequest>(&body) {
                Ok(request) => match table.propose(&request) {
                    Ok(PlannerResponse { program }) => ("200 OK", serde_json::json!({ "program": program })),
                    Err(e) => ("404 Not Found", serde_json::json!({ "error": e.to_string() })),
                },
                Err(e) => ("400 Bad Request", serde_json::json!({ "error": e.to_string() })),
            };
            let reply = reply.to_string();
            let _ = write!(
                &stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    Ok(url)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let task = std::env::args().nth(1).unwrap_or_else(|| "pick up the kettle".into());
    let planner = match RemotePlanner::from_env() {
        Ok(p) => p,
        Err(_) => RemotePlanner::new(&local_endpoint()?, std::time::Duration::from_secs(5)),
    };
    println!("planner endpoint: {}", planner.url());
    let scene = SceneState::reset("kettle", 0)?;
    let request = PlannerRequest::new(&task, &scene, None, 0);
    match propose_plan(&planner, &request, &scene, DEFAULT_RETRIES) {
        Ok(p) => println!("accepted after {} attempt(s):\n{}", p.attempts, p.plan.source_text),
        Err(e) => println!("no plan: {e}"),
    }
    Ok(())
}
