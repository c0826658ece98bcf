//! Run the session service.
//!
//! ```text
//! cargo run -p steer-gateway --example serve -- [PORT] [PERSIST_DIR]
//! curl -s -XPOST localhost:8080/sessions -d '{"scenario":"single_cup"}'
//! ```

use std::net::SocketAddr;

use steer_gateway::{serve, GatewayConfig};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let port: u16 = args.next().and_then(|p| p.parse().ok()).unwrap_or(8080);
    let config = GatewayConfig {
        persist_dir: args.next().map(Into::into),
        ..Default::default()
    }
    .with_planner_env();
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    println!("listening on http://{addr}");
    serve(addr, config).await
}
