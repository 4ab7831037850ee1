//! WebSocket control plane in front of a [`RenderLoop`].
//!
//! Each client gets a reader task, a writer task fed by a bounded outbound
//! queue, and (once subscribed) a telemetry task. Replies wait for queue
//! space; telemetry frames that do not fit are dropped, so a client that
//! stops reading only ever stalls itself.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use log::{debug, info, warn};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, watch};
use tokio::task::JoinSet;
use tokio::time::MissedTickBehavior;
use tokio_tungstenite::tungstenite::Message;

use crate::error::Result;
use crate::protocol::{parse_inbound, to_command, ControlMessage, ServerFrame};
use crate::realtime::{Controller, LoopConfig, LoopReport, NullSink, RenderLoop};
use crate::render::{Engine, Snapshot};
use crate::signal::SignalConfig;

#[derive(Clone, Copy, Debug)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub loop_cfg: LoopConfig,
    /// Frames queued per client before telemetry starts dropping.
    pub outbound_capacity: usize,
}

impl ServiceConfig {
    pub fn new(addr: SocketAddr) -> Self {
        ServiceConfig {
            addr,
            loop_cfg: LoopConfig::default(),
            outbound_capacity: 32,
        }
    }
}

struct Shared {
    layout_frame: String,
    controller: Controller,
    latest: watch::Receiver<Arc<Snapshot>>,
    signal_cfg: SignalConfig,
    sample_rate: u32,
    outbound_capacity: usize,
}

/// A running service; dropping it without [`shutdown`](Service::shutdown)
/// leaves the tasks to die with the runtime.
pub struct Service {
    local_addr: SocketAddr,
    shutdown_tx: watch::Sender<bool>,
    accept_task: tokio::task::JoinHandle<()>,
    hub_task: tokio::task::JoinHandle<()>,
    render: RenderLoop,
}

impl Service {
    /// Binds the listener and starts the render loop.
    pub async fn start(engine: Engine, cfg: ServiceConfig) -> Result<Service> {
        let listener = TcpListener::bind(cfg.addr).await?;
        let local_addr = listener.local_addr()?;
        let layout_frame = ServerFrame::layout(engine.layout()).to_json();
        let signal_cfg = *engine.signal_config();
        let sample_rate = engine.render_config().sample_rate;
        let (latest_tx, latest_rx) = watch::channel(Arc::new(engine.snapshot()));

        let render = RenderLoop::spawn(engine, NullSink, cfg.loop_cfg);
        let (shutdown_tx, shutdown_rx) = watch::channel(false);

        let queue = render.telemetry();
        let mut hub_shutdown = shutdown_rx.clone();
        let hub_task = tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_millis(2));
            tick.set_missed_tick_behavior(MissedTickBehavior::Skip);
            loop {
                tokio::select! {
                    _ = tick.tick() => {
                        let mut newest = None;
                        while let Some(s) = queue.pop() {
                            newest = Some(s);
                        }
                        if let Some(s) = newest {
                            latest_tx.send_replace(s);
                        }
                    }
                    _ = hub_shutdown.changed() => break,
                }
            }
        });

        let shared = Arc::new(Shared {
            layout_frame,
            controller: render.controller(),
            latest: latest_rx,
            signal_cfg,
            sample_rate,
            outbound_capacity: cfg.outbound_capacity.max(1),
        });
        let accept_task = tokio::spawn(accept_loop(listener, shared, shutdown_rx));
        info!("listening on ws://{local_addr}");
        Ok(Service {
            local_addr,
            shutdown_tx,
            accept_task,
            hub_task,
            render,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn blocks_rendered(&self) -> u64 {
        self.render.blocks_rendered()
    }

    /// Closes the listener, drops every connection and stops the render loop.
    pub async fn shutdown(self) -> LoopReport {
        let _ = self.shutdown_tx.send(true);
        let _ = self.accept_task.await;
        let _ = self.hub_task.await;
        let render = self.render;
        tokio::task::spawn_blocking(move || render.stop())
            .await
            .expect("render loop join")
    }
}

async fn accept_loop(listener: TcpListener, shared: Arc<Shared>, mut shutdown: watch::Receiver<bool>) {
    let mut connections = JoinSet::new();
    loop {
        tokio::select! {
            accepted = listener.accept() => match accepted {
                Ok((stream, peer)) => {
                    let shared = shared.clone();
                    connections.spawn(async move {
                        info!("client {peer} connected");
                        if let Err(e) = connection(stream, shared).await {
                            debug!("client {peer}: {e}");
                        }
                        info!("client {peer} disconnected");
                    });
                }
                Err(e) => warn!("accept failed: {e}"),
            },
            Some(_) = connections.join_next(), if !connections.is_empty() => {}
            _ = shutdown.changed() => break,
        }
    }
    drop(listener);
    connections.abort_all();
    while connections.join_next().await.is_some() {}
}

async fn connection(stream: TcpStream, shared: Arc<Shared>) -> std::result::Result<(), String> {
    let _ = stream.set_nodelay(true);
    let ws = tokio_tungstenite::accept_async(stream).await.map_err(|e| e.to_string())?;
    let (mut sink, mut source) = ws.split();
    let (out_tx, mut out_rx) = mpsc::channel::<Message>(shared.outbound_capacity);

    let mut writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            if sink.send(msg).await.is_err() {
                return;
            }
        }
        let _ = sink.close().await;
    });

    out_tx
        .send(Message::Text(shared.layout_frame.clone()))
        .await
        .map_err(|_| "writer closed")?;

    let (rate_tx, rate_rx) = watch::channel(0.0f64);
    let mut telemetry: Option<tokio::task::JoinHandle<()>> = None;

    while let Some(msg) = source.next().await {
        let text = match msg {
            Ok(Message::Text(t)) => t,
            Ok(Message::Binary(_)) => {
                let frame = ServerFrame::error(None, "binary frames are not supported", None);
                if out_tx.send(Message::Text(frame.to_json())).await.is_err() {
                    break;
                }
                continue;
            }
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        let reply = match parse_inbound(&text, shared.sample_rate) {
            Err(rejection) => rejection.to_frame(),
            Ok(inbound) => {
                if let ControlMessage::SubscribeTelemetry { rate_hz } = inbound.message {
                    rate_tx.send_replace(rate_hz);
                    if telemetry.is_none() {
                        telemetry = Some(tokio::spawn(telemetry_loop(
                            rate_rx.clone(),
                            shared.latest.clone(),
                            out_tx.clone(),
                        )));
                    }
                    ServerFrame::ack(inbound.seq)
                } else {
                    match to_command(&inbound.message, &shared.signal_cfg, shared.sample_rate) {
                        Err(e) => ServerFrame::error(inbound.seq, e, None),
                        Ok(None) => ServerFrame::ack(inbound.seq),
                        Ok(Some(cmd)) => match shared.controller.apply(cmd).await {
                            Ok(()) => ServerFrame::ack(inbound.seq),
                            Err(e) => ServerFrame::error(inbound.seq, e, None),
                        },
                    }
                }
            }
        };
        if out_tx.send(Message::Text(reply.to_json())).await.is_err() {
            break;
        }
    }

    if let Some(t) = telemetry {
        t.abort();
    }
    drop(out_tx);
    // give queued replies a moment to flush, then give up on a stalled peer
    if tokio::time::timeout(Duration::from_millis(500), &mut writer).await.is_err() {
        writer.abort();
    }
    Ok(())
}

async fn telemetry_loop(
    mut rate: watch::Receiver<f64>,
    latest: watch::Receiver<Arc<Snapshot>>,
    out: mpsc::Sender<Message>,
) {
    loop {
        let hz = *rate.borrow_and_update();
        let mut tick = tokio::time::interval(Duration::from_secs_f64(1.0 / hz));
        tick.set_missed_tick_behavior(MissedTickBehavior::Skip);
        loop {
            tokio::select! {
                _ = tick.tick() => {
                    let snapshot = latest.borrow().clone();
                    let frame = ServerFrame::telemetry(&snapshot).to_json();
                    match out.try_send(Message::Text(frame)) {
                        Ok(()) => {}
                        Err(mpsc::error::TrySendError::Full(_)) => {}
                        Err(mpsc::error::TrySendError::Closed(_)) => return,
                    }
                }
                changed = rate.changed() => {
                    if changed.is_err() {
                        return;
                    }
                    break;
                }
            }
        }
    }
}
