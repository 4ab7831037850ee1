// WebSocket control of a running engine.
//
// Starts the service on an ephemeral port, connects as a client, places a
// source, subscribes to telemetry and prints a few frames before shutting down.

use std::error::Error;
use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;
use vibropan::service::{Service, ServiceConfig};
use vibropan::{Engine, PanningParams, RenderConfig, SignalConfig};

async fn session() -> Result<(), Box<dyn Error>> {
    let layout = vibropan::io::load_layout_file(&vibropan::data_dir().join("jacket_layout.json"))?;
    let engine = Engine::new(layout, PanningParams::default(), SignalConfig::default(), RenderConfig::default())?;
    let addr: SocketAddr = "127.0.0.1:0".parse()?;
    let service = Service::start(engine, ServiceConfig::new(addr)).await?;
    let url = format!("ws://{}", service.local_addr());
    println!("service on {url}");

    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str()).await?;
    let layout_frame: Value = loop {
        match ws.next().await {
            Some(Ok(Message::Text(t))) => break serde_json::from_str(&t)?,
            Some(Ok(_)) => continue,
            _ => return Err("connection closed before layout".into()),
        }
    };
    println!("layout: {} channels", layout_frame["channels"]);

    let requests = [
        json!({"type": "set_signal", "id": "buzz", "preset": "rumble", "seq": 1}),
        json!({"type": "set_source", "id": "buzz", "pos": [0.4, 0.4, 0.0], "gain": 0.9, "seq": 2}),
        json!({"type": "subscribe_telemetry", "rate_hz": 20, "seq": 3}),
        json!({"type": "set_source", "id": "buzz", "pos": [0.4, 0.4], "seq": 4}),
    ];
    for r in &requests {
        ws.send(Message::Text(r.to_string())).await?;
    }

    let mut telemetry = 0;
    let deadline = tokio::time::Instant::now() + Duration::from_secs(3);
    while telemetry < 4 && tokio::time::Instant::now() < deadline {
        let Some(Ok(Message::Text(t))) = ws.next().await else { break };
        let frame: Value = serde_json::from_str(&t)?;
        match frame["type"].as_str() {
            Some("ack") => println!("ack seq={}", frame["seq"]),
            Some("error") => println!("error seq={}: {}", frame["seq"], frame["message"]),
            Some("telemetry") => {
                telemetry += 1;
                if let Some(s) = frame["sources"].get(0) {
                    println!(
                        "t={:.3} intensity={:.4} weights={}",
                        frame["t"].as_f64().unwrap_or(0.0),
                        s["intensity"].as_f64().unwrap_or(0.0),
                        s["weights"]
                    );
                }
            }
            _ => {}
        }
    }
    ws.close(None).await?;
    let report = service.shutdown().await;
    println!(
        "rendered {} blocks, mean interval {:.3} ms, jitter {:.3} ms",
        report.blocks,
        1e3 * report.mean_interval(),
        1e3 * report.jitter()
    );
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(session())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
