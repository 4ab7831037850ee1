//! Paced render loop.
//!
//! The loop thread owns the [`Engine`]. Control requests arrive through a
//! bounded queue drained without waiting at block boundaries; per-block
//! snapshots leave through a fixed-capacity queue that overwrites its oldest
//! entry when full. The render path never blocks on either side.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crossbeam_queue::ArrayQueue;
use tokio::sync::{mpsc, oneshot};

use crate::render::{Block, Command, Engine, Snapshot};

/// Outcome of applying a command, sent back to the requester.
pub type CommandResult = std::result::Result<(), String>;

pub struct ControlRequest {
    pub command: Command,
    pub reply: Option<oneshot::Sender<CommandResult>>,
}

/// Receives every rendered block on the loop thread. Implementations must not block.
pub trait BlockSink: Send + 'static {
    fn consume(&mut self, block: &Block);
}

/// Discards blocks; stands in for an audio device.
pub struct NullSink;

impl BlockSink for NullSink {
    fn consume(&mut self, _block: &Block) {}
}

#[derive(Clone, Copy, Debug)]
pub struct LoopConfig {
    pub command_capacity: usize,
    pub telemetry_capacity: usize,
    /// Commands applied per block at most; the rest wait for the next block.
    pub max_commands_per_block: usize,
    /// Intervals kept for the report.
    pub interval_history: usize,
    /// Ask the OS for real-time scheduling of the loop thread; refused requests are ignored.
    pub realtime_priority: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            command_capacity: 256,
            telemetry_capacity: 64,
            max_commands_per_block: 64,
            interval_history: 8192,
            realtime_priority: true,
        }
    }
}

/// Cloneable handle for submitting commands to a running loop.
#[derive(Clone)]
pub struct Controller {
    tx: mpsc::Sender<ControlRequest>,
}

impl Controller {
    /// Queues `command` and waits until the loop has applied it.
    pub async fn apply(&self, command: Command) -> CommandResult {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(ControlRequest {
                command,
                reply: Some(reply),
            })
            .await
            .map_err(|_| "render loop stopped".to_string())?;
        rx.await.map_err(|_| "render loop stopped".to_string())?
    }

    /// Queues `command` without waiting; fails if the queue is full.
    pub fn try_submit(&self, command: Command) -> CommandResult {
        self.tx
            .try_send(ControlRequest { command, reply: None })
            .map_err(|e| match e {
                mpsc::error::TrySendError::Full(_) => "control queue full".to_string(),
                mpsc::error::TrySendError::Closed(_) => "render loop stopped".to_string(),
            })
    }
}

/// Timing summary returned when the loop stops.
#[derive(Clone, Debug)]
pub struct LoopReport {
    pub blocks: u64,
    /// Nominal block period in seconds.
    pub period: f64,
    /// Most recent block-start intervals in seconds, oldest first.
    pub intervals: Vec<f64>,
    /// Whether the loop thread ran with real-time scheduling.
    pub realtime: bool,
}

impl LoopReport {
    /// Mean absolute deviation of block intervals from the nominal period, seconds.
    pub fn jitter(&self) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        self.intervals.iter().map(|i| (i - self.period).abs()).sum::<f64>() / self.intervals.len() as f64
    }

    pub fn mean_interval(&self) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        self.intervals.iter().sum::<f64>() / self.intervals.len() as f64
    }
}

pub struct RenderLoop {
    controller: Controller,
    telemetry: Arc<ArrayQueue<Arc<Snapshot>>>,
    stop: Arc<AtomicBool>,
    blocks: Arc<AtomicU64>,
    thread: Option<JoinHandle<LoopReport>>,
}

impl RenderLoop {
    pub fn spawn(engine: Engine, sink: impl BlockSink, cfg: LoopConfig) -> Self {
        let (tx, rx) = mpsc::channel(cfg.command_capacity.max(1));
        let telemetry = Arc::new(ArrayQueue::new(cfg.telemetry_capacity.max(1)));
        let stop = Arc::new(AtomicBool::new(false));
        let blocks = Arc::new(AtomicU64::new(0));
        let state = LoopState {
            engine,
            sink,
            rx,
            telemetry: telemetry.clone(),
            stop: stop.clone(),
            blocks: blocks.clone(),
            cfg,
        };
        let thread = std::thread::Builder::new()
            .name("vibropan-render".into())
            .spawn(move || state.run())
            .expect("spawn render thread");
        RenderLoop {
            controller: Controller { tx },
            telemetry,
            stop,
            blocks,
            thread: Some(thread),
        }
    }

    pub fn controller(&self) -> Controller {
        self.controller.clone()
    }

    /// Queue of per-block snapshots; consumers pop, the loop overwrites the oldest.
    pub fn telemetry(&self) -> Arc<ArrayQueue<Arc<Snapshot>>> {
        self.telemetry.clone()
    }

    pub fn blocks_rendered(&self) -> u64 {
        self.blocks.load(Ordering::Relaxed)
    }

    /// Stops the loop and waits for the thread to exit.
    pub fn stop(mut self) -> LoopReport {
        self.stop.store(true, Ordering::Relaxed);
        self.thread
            .take()
            .expect("loop joined once")
            .join()
            .expect("render thread panicked")
    }
}

impl Drop for RenderLoop {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

struct LoopState<S> {
    engine: Engine,
    sink: S,
    rx: mpsc::Receiver<ControlRequest>,
    telemetry: Arc<ArrayQueue<Arc<Snapshot>>>,
    stop: Arc<AtomicBool>,
    blocks: Arc<AtomicU64>,
    cfg: LoopConfig,
}

impl<S: BlockSink> LoopState<S> {
    fn run(mut self) -> LoopReport {
        let realtime = self.cfg.realtime_priority && raise_priority();
        log::debug!("render thread real-time scheduling: {realtime}");
        let rc = *self.engine.render_config();
        let period = Duration::from_secs_f64(rc.block_duration());
        let mut block = Block::new(self.engine.channels(), rc.block);
        let history = self.cfg.interval_history.max(1);
        let mut intervals = Vec::with_capacity(history);
        let mut ring_pos = 0usize;
        let mut count = 0u64;
        let mut last_start: Option<Instant> = None;
        let mut deadline = Instant::now();

        while !self.stop.load(Ordering::Relaxed) {
            let start = Instant::now();
            if let Some(prev) = last_start {
                let dt = (start - prev).as_secs_f64();
                if intervals.len() < history {
                    intervals.push(dt);
                } else {
                    intervals[ring_pos] = dt;
                    ring_pos = (ring_pos + 1) % history;
                }
            }
            last_start = Some(start);

            for _ in 0..self.cfg.max_commands_per_block {
                match self.rx.try_recv() {
                    Ok(req) => {
                        let result = self.engine.apply(req.command).map_err(|e| e.to_string());
                        if let Some(reply) = req.reply {
                            let _ = reply.send(result);
                        }
                    }
                    Err(_) => break,
                }
            }

            self.telemetry.force_push(Arc::new(self.engine.snapshot()));
            self.engine.render_block_into(&mut block);
            self.sink.consume(&block);
            count += 1;
            self.blocks.store(count, Ordering::Relaxed);

            deadline += period;
            let now = Instant::now();
            if deadline > now {
                std::thread::sleep(deadline - now);
            } else if now - deadline > period * 4 {
                // fell far behind; resynchronise instead of bursting
                deadline = now;
            }
        }

        intervals.rotate_left(ring_pos);
        LoopReport {
            blocks: count,
            period: period.as_secs_f64(),
            intervals,
            realtime,
        }
    }
}

/// Requests FIFO scheduling at mid priority for the calling thread.
#[cfg(unix)]
fn raise_priority() -> bool {
    // SAFETY: plain libc calls on the current thread with a zero-initialised,
    // fully assigned parameter struct.
    unsafe {
        let max = libc::sched_get_priority_max(libc::SCHED_FIFO);
        let min = libc::sched_get_priority_min(libc::SCHED_FIFO);
        if max < 0 || min < 0 {
            return false;
        }
        let mut param: libc::sched_param = std::mem::zeroed();
        param.sched_priority = min + (max - min) / 2;
        libc::pthread_setschedparam(libc::pthread_self(), libc::SCHED_FIFO, &param) == 0
    }
}

#[cfg(not(unix))]
fn raise_priority() -> bool {
    false
}
