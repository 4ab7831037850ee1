//! Minimal WebSocket client and service fixture for protocol tests.

use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};
use vibropan::service::{Service, ServiceConfig};
use vibropan::{Engine, PanningParams, RenderConfig, SignalConfig};

pub async fn start_service() -> Service {
    let engine = Engine::new(super::jacket(), PanningParams::default(), SignalConfig::default(), RenderConfig::default())
        .unwrap();
    Service::start(engine, ServiceConfig::new("127.0.0.1:0".parse().unwrap())).await.unwrap()
}

pub struct Client {
    pub ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl Client {
    /// Connects and returns the client with the layout frame it was greeted with.
    pub async fn connect(addr: SocketAddr) -> (Client, Value) {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}")).await.unwrap();
        let mut c = Client { ws };
        let layout = c.recv().await.expect("layout frame");
        (c, layout)
    }

    pub async fn send(&mut self, v: Value) {
        self.send_text(&v.to_string()).await;
    }

    pub async fn send_text(&mut self, s: &str) {
        self.ws.send(Message::Text(s.to_string())).await.unwrap();
    }

    /// Next text frame as JSON, or `None` on close or after two quiet seconds.
    pub async fn recv(&mut self) -> Option<Value> {
        loop {
            let msg = tokio::time::timeout(Duration::from_secs(2), self.ws.next()).await.ok()??;
            match msg {
                Ok(Message::Text(t)) => return Some(serde_json::from_str(&t).expect("server sends JSON")),
                Ok(Message::Close(_)) | Err(_) => return None,
                Ok(_) => continue,
            }
        }
    }

    /// Next non-telemetry frame.
    pub async fn reply(&mut self) -> Option<Value> {
        loop {
            let v = self.recv().await?;
            if v["type"] != "telemetry" {
                return Some(v);
            }
        }
    }
}
