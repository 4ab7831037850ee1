//! Turning sources, a layout and intensity signals into per-actuator carriers.
//!
//! [`Engine`] is the block renderer shared by the offline path
//! ([`render_trajectory`]) and the paced loop in [`crate::realtime`]. Once per
//! block it evaluates every source's channel intensities, converts them to
//! carrier amplitudes, and ramps each channel toward its target under a
//! per-sample slew limit while a single continuous-phase carrier runs.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::localization::{ActuatorLayout, PanningParams, VirtualSource};
use crate::signal::{
    self, carrier_amplitude, check_sample_rate, perceived_intensity_envelope,
    perceived_intensity_envelope_periodic, preset_signal, IntensityEnvelope, Preset,
    SensitivityFilter, SignalConfig, Waveform, PRESET_LOOP_SECONDS,
};

/// Upper bound on simultaneously live sources in an engine.
pub const MAX_SOURCES: usize = 64;

/// Full-scale carrier amplitude; targets above it are limited.
pub const AMPLITUDE_RANGE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keyframe {
    pub t: f64,
    pub position: Vec3,
    pub gain: f64,
}

/// Time-stamped source positions and gains, linearly interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    keyframes: Vec<Keyframe>,
}

impl Trajectory {
    pub fn new(keyframes: Vec<Keyframe>) -> Result<Self> {
        if keyframes.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        for (i, k) in keyframes.iter().enumerate() {
            if !k.t.is_finite() || !k.position.is_finite() || !k.gain.is_finite() {
                return Err(Error::param(format!("keyframes[{i}]"), "values must be finite"));
            }
            if k.gain < 0.0 {
                return Err(Error::param(format!("keyframes[{i}].gain"), "must be >= 0"));
            }
            if i > 0 && k.t <= keyframes[i - 1].t {
                return Err(Error::param(format!("keyframes[{i}].t"), "must be strictly increasing"));
            }
        }
        Ok(Trajectory { keyframes })
    }

    pub fn keyframes(&self) -> &[Keyframe] {
        &self.keyframes
    }

    /// Time of the last keyframe.
    pub fn duration(&self) -> f64 {
        self.keyframes.last().map_or(0.0, |k| k.t)
    }

    /// Position and gain at time `t`, holding the first and last keyframes
    /// outside their range.
    pub fn sample(&self, t: f64) -> (Vec3, f64) {
        let k = &self.keyframes;
        let first = k[0];
        let last = k[k.len() - 1];
        if t <= first.t {
            return (first.position, first.gain);
        }
        if t >= last.t {
            return (last.position, last.gain);
        }
        // first index with k.t > t; both neighbours exist here
        let hi = k.partition_point(|kf| kf.t <= t);
        let (a, b) = (k[hi - 1], k[hi]);
        let f = (t - a.t) / (b.t - a.t);
        (a.position.lerp(b.position, f), a.gain + (b.gain - a.gain) * f)
    }
}

/// Horizontal circle around `center` starting straight ahead (+y) and
/// turning toward +x, closed so the last row repeats the first position.
pub fn orbit_trajectory(center: Vec3, radius: f64, duration: f64, rows: usize, gain: f64) -> Result<Trajectory> {
    if rows < 2 {
        return Err(Error::param("rows", "an orbit needs at least two rows"));
    }
    let keyframes = (0..rows)
        .map(|i| {
            let f = i as f64 / (rows - 1) as f64;
            let a = TAU * f;
            Keyframe {
                t: duration * f,
                position: center + Vec3::new(radius * a.sin(), radius * a.cos(), 0.0),
                gain,
            }
        })
        .collect();
    Trajectory::new(keyframes)
}

/// Per-actuator sample streams; channel order is layout actuator order.
#[derive(Clone, Debug, PartialEq)]
pub struct MultichannelBuffer {
    pub channels: Vec<Vec<f32>>,
    pub sample_rate: u32,
}

impl MultichannelBuffer {
    pub fn new(channels: usize, frames: usize, sample_rate: u32) -> Self {
        MultichannelBuffer {
            channels: vec![vec![0.0; frames]; channels],
            sample_rate,
        }
    }

    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn duration(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    /// Mean-square level per channel over consecutive windows of `window` frames.
    pub fn windowed_energy(&self, window: usize) -> Vec<Vec<f64>> {
        let window = window.max(1);
        self.channels
            .iter()
            .map(|c| {
                c.chunks(window)
                    .map(|w| w.iter().map(|&s| (s as f64) * (s as f64)).sum::<f64>() / w.len() as f64)
                    .collect()
            })
            .collect()
    }

    /// Time (seconds, window center) at which each channel's windowed energy peaks.
    pub fn energy_peak_times(&self, window: usize) -> Vec<f64> {
        let window = window.max(1);
        self.windowed_energy(window)
            .iter()
            .map(|e| {
                let k = crate::localization::argmax(e);
                (k as f64 + 0.5) * window as f64 / self.sample_rate as f64
            })
            .collect()
    }

    pub fn peaks(&self) -> Vec<f32> {
        self.channels
            .iter()
            .map(|c| c.iter().fold(0.0f32, |m, s| m.max(s.abs())))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub sample_rate: u32,
    /// Samples per control update.
    pub block: usize,
    /// Seconds for a full-scale amplitude swing; zero disables slewing.
    pub slew: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            sample_rate: 48_000,
            block: 256,
            slew: 0.010,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| {
            if prefix.is_empty() {
                name.to_string()
            } else {
                format!("{prefix}.{name}")
            }
        };
        check_sample_rate(self.sample_rate, &field("sample_rate"))?;
        if self.block < 16 {
            return Err(Error::param(field("block"), format!("must be >= 16, got {}", self.block)));
        }
        if !self.slew.is_finite() || self.slew < 0.0 {
            return Err(Error::param(field("slew"), "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Largest per-sample amplitude change allowed by the slew setting.
    pub fn max_delta(&self) -> f64 {
        if self.slew > 0.0 {
            AMPLITUDE_RANGE / (self.slew * self.sample_rate as f64)
        } else {
            f64::INFINITY
        }
    }

    pub fn block_duration(&self) -> f64 {
        self.block as f64 / self.sample_rate as f64
    }
}

/// Moves `current` toward `target` by at most `max_delta`.
pub fn slew_step(current: f64, target: f64, max_delta: f64) -> f64 {
    let diff = target - current;
    if diff.abs() <= max_delta {
        target
    } else {
        current + max_delta.copysign(diff)
    }
}

/// Perceived intensity `I0(t)` driving a source.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSignal {
    Constant(f64),
    Envelope {
        envelope: Arc<IntensityEnvelope>,
        looping: bool,
    },
}

impl SourceSignal {
    pub fn intensity_at(&self, t: f64) -> f64 {
        match self {
            SourceSignal::Constant(i) => *i,
            SourceSignal::Envelope { envelope, looping: true } => envelope.value_at_looped(t),
            SourceSignal::Envelope { envelope, looping: false } => {
                if t > envelope.duration() {
                    0.0
                } else {
                    envelope.value_at(t)
                }
            }
        }
    }

    /// Looping intensity of a preset, analysed as a periodic signal so the
    /// loop seam carries no onset transient.
    pub fn preset(preset: Preset, cfg: &SignalConfig, sample_rate: u32) -> Result<Self> {
        let wave = preset_signal(preset, PRESET_LOOP_SECONDS, cfg, sample_rate)?;
        Ok(SourceSignal::Envelope {
            envelope: Arc::new(perceived_intensity_envelope_periodic(&wave, cfg)),
            looping: true,
        })
    }

    /// One-shot intensity of an arbitrary waveform; silent after it ends.
    pub fn from_waveform(wave: &Waveform, cfg: &SignalConfig) -> Self {
        SourceSignal::Envelope {
            envelope: Arc::new(perceived_intensity_envelope(wave, cfg)),
            looping: false,
        }
    }
}

#[derive(Clone, Debug)]
struct SourceSlot {
    source: VirtualSource,
    signal: SourceSignal,
}

/// Control changes applied at block boundaries.
#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    SetSource { id: String, position: Vec3, gain: f64 },
    SetSignal { id: String, signal: SourceSignal },
    RemoveSource { id: String },
}

/// One source's share of the current block, as reported to telemetry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceTelemetry {
    pub id: String,
    pub position: Vec3,
    pub gain: f64,
    pub intensity: f64,
    pub weights: Vec<f64>,
    pub attenuation: f64,
    pub intensities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    /// Seconds since the engine started, at the start of the block.
    pub t: f64,
    pub sources: Vec<SourceTelemetry>,
}

/// One rendered block, reusable across calls.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub channels: Vec<Vec<f32>>,
    /// Carrier amplitude applied to each sample, per channel.
    pub amplitudes: Vec<Vec<f64>>,
}

impl Block {
    pub fn new(channels: usize, len: usize) -> Self {
        Block {
            channels: vec![vec![0.0; len]; channels],
            amplitudes: vec![vec![0.0; len]; channels],
        }
    }
}

/// Renderer state: layout, parameters, live sources, channel amplitudes and
/// carrier phase.
#[derive(Clone, Debug)]
pub struct Engine {
    layout: ActuatorLayout,
    params: PanningParams,
    signal_cfg: SignalConfig,
    cfg: RenderConfig,
    sources: BTreeMap<String, SourceSlot>,
    amplitudes: Vec<f64>,
    phase: f64,
    phase_inc: f64,
    carrier_gain: f64,
    max_delta: f64,
    elapsed: u64,
    limited: u64,
    default_signal: SourceSignal,
    scratch: Vec<f64>,
    targets: Vec<f64>,
}

impl Engine {
    pub fn new(
        layout: ActuatorLayout,
        params: PanningParams,
        signal_cfg: SignalConfig,
        cfg: RenderConfig,
    ) -> Result<Self> {
        params.validate("panning")?;
        cfg.validate("render")?;
        signal_cfg.validate("signal", cfg.sample_rate)?;
        let n = layout.len();
        let default_signal = SourceSignal::preset(Preset::Sine, &signal_cfg, cfg.sample_rate)?;
        let carrier_gain = SensitivityFilter::from_config(&signal_cfg, cfg.sample_rate).gain_at(signal_cfg.carrier_hz);
        Ok(Engine {
            layout,
            params,
            signal_cfg,
            cfg,
            sources: BTreeMap::new(),
            amplitudes: vec![0.0; n],
            phase: 0.0,
            phase_inc: TAU * signal_cfg.carrier_hz / cfg.sample_rate as f64,
            carrier_gain,
            max_delta: cfg.max_delta(),
            elapsed: 0,
            limited: 0,
            default_signal,
            scratch: vec![0.0; n],
            targets: vec![0.0; n],
        })
    }

    pub fn layout(&self) -> &ActuatorLayout {
        &self.layout
    }

    pub fn params(&self) -> &PanningParams {
        &self.params
    }

    pub fn signal_config(&self) -> &SignalConfig {
        &self.signal_cfg
    }

    pub fn render_config(&self) -> &RenderConfig {
        &self.cfg
    }

    pub fn channels(&self) -> usize {
        self.layout.len()
    }

    /// Seconds rendered so far.
    pub fn time(&self) -> f64 {
        self.elapsed as f64 / self.cfg.sample_rate as f64
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Channel-blocks whose target amplitude exceeded full scale.
    pub fn limited_count(&self) -> u64 {
        self.limited
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn source(&self, id: &str) -> Option<&VirtualSource> {
        self.sources.get(id).map(|s| &s.source)
    }

    pub fn source_ids(&self) -> impl Iterator<Item = &str> {
        self.sources.keys().map(String::as_str)
    }

    /// Default signal for sources created without one: the looped sine preset.
    pub fn default_signal(&self) -> &SourceSignal {
        &self.default_signal
    }

    pub fn apply(&mut self, cmd: Command) -> Result<()> {
        match cmd {
            Command::SetSource { id, position, gain } => {
                let source = VirtualSource::new(id, position, gain)?;
                match self.sources.get_mut(&source.id) {
                    Some(slot) => slot.source = source,
                    None => {
                        self.check_capacity()?;
                        let signal = self.default_signal.clone();
                        self.sources.insert(source.id.clone(), SourceSlot { source, signal });
                    }
                }
            }
            Command::SetSignal { id, signal } => match self.sources.get_mut(&id) {
                Some(slot) => slot.signal = signal,
                None => {
                    // parked silent at the origin until a set_source places it
                    self.check_capacity()?;
                    let source = VirtualSource::new(id.clone(), self.layout.perceived_origin(), 0.0)?;
                    self.sources.insert(id, SourceSlot { source, signal });
                }
            },
            Command::RemoveSource { id } => {
                self.sources.remove(&id);
            }
        }
        Ok(())
    }

    fn check_capacity(&self) -> Result<()> {
        if self.sources.len() >= MAX_SOURCES {
            return Err(Error::param("id", format!("engine already holds {MAX_SOURCES} sources")));
        }
        Ok(())
    }

    /// Per-channel intensity targets at the current time.
    fn compute_targets(&mut self) {
        let t = self.time();
        self.targets.fill(0.0);
        for slot in self.sources.values() {
            let i0 = slot.signal.intensity_at(t);
            self.layout.accumulate_intensities(
                slot.source.position,
                slot.source.gain,
                i0,
                &self.params,
                &mut self.scratch,
                &mut self.targets,
            );
        }
    }

    /// Channel intensities the next block will aim for.
    pub fn channel_targets(&mut self) -> Vec<f64> {
        self.compute_targets();
        self.targets.clone()
    }

    /// Renders one block into `out`, which must be sized for this engine's
    /// channel count; its length sets the block size.
    pub fn render_block_into(&mut self, out: &mut Block) {
        assert_eq!(out.channels.len(), self.channels(), "block channel count mismatch");
        self.compute_targets();
        for target in self.targets.iter_mut() {
            let amp = carrier_amplitude(*target, self.carrier_gain);
            if amp > AMPLITUDE_RANGE {
                self.limited += 1;
            }
            *target = amp.min(AMPLITUDE_RANGE);
        }
        let len = out.channels[0].len();
        for n in 0..len {
            let carrier = self.phase.sin();
            for (k, amp) in self.amplitudes.iter_mut().enumerate() {
                *amp = slew_step(*amp, self.targets[k], self.max_delta);
                out.amplitudes[k][n] = *amp;
                out.channels[k][n] = (*amp * carrier) as f32;
            }
            self.phase = signal::wrap_phase(self.phase + self.phase_inc);
        }
        self.elapsed += len as u64;
    }

    /// Renders one block of the configured size.
    pub fn render_block(&mut self) -> Block {
        let mut block = Block::new(self.channels(), self.cfg.block);
        self.render_block_into(&mut block);
        block
    }

    /// Weights, attenuation and intensities of every live source at the
    /// current time, via the same per-source computation the renderer uses.
    pub fn snapshot(&self) -> Snapshot {
        let t = self.time();
        let sources = self
            .sources
            .values()
            .map(|slot| {
                let intensity = slot.signal.intensity_at(t);
                let c = self
                    .layout
                    .contribution(slot.source.position, slot.source.gain, intensity, &self.params);
                SourceTelemetry {
                    id: slot.source.id.clone(),
                    position: slot.source.position,
                    gain: slot.source.gain,
                    intensity,
                    weights: c.weights.r,
                    attenuation: c.attenuation,
                    intensities: c.intensities,
                }
            })
            .collect();
        Snapshot { t, sources }
    }
}

/// Signal attached to an offline trajectory render.
#[derive(Clone, Debug, PartialEq)]
pub enum TrajectorySignal {
    Preset(Preset),
    Waveform(Waveform),
    Constant(f64),
}

/// Source id used for the single source of an offline render.
pub const TRAJECTORY_SOURCE_ID: &str = "trajectory";

/// Deterministic offline render of one source following `traj`.
///
/// Output length is `ceil(duration * sample_rate)` rounded up to a whole
/// number of blocks.
pub fn render_trajectory(
    traj: &Trajectory,
    signal: &TrajectorySignal,
    layout: &ActuatorLayout,
    params: &PanningParams,
    signal_cfg: &SignalConfig,
    cfg: &RenderConfig,
) -> Result<MultichannelBuffer> {
    if traj.keyframes().is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut engine = Engine::new(layout.clone(), *params, *signal_cfg, *cfg)?;
    let source_signal = match signal {
        TrajectorySignal::Preset(p) => SourceSignal::preset(*p, signal_cfg, cfg.sample_rate)?,
        TrajectorySignal::Waveform(w) => SourceSignal::from_waveform(w, signal_cfg),
        TrajectorySignal::Constant(i) => {
            if !i.is_finite() || *i < 0.0 {
                return Err(Error::param("intensity", "must be finite and >= 0"));
            }
            SourceSignal::Constant(*i)
        }
    };
    let id = TRAJECTORY_SOURCE_ID.to_string();
    engine.apply(Command::SetSignal {
        id: id.clone(),
        signal: source_signal,
    })?;

    let sr = cfg.sample_rate as f64;
    let frames = (traj.duration() * sr).ceil() as usize;
    let blocks = frames.div_ceil(cfg.block);
    let mut buffer = MultichannelBuffer::new(layout.len(), blocks * cfg.block, cfg.sample_rate);
    let mut block = Block::new(layout.len(), cfg.block);
    for b in 0..blocks {
        let (position, gain) = traj.sample(engine.time());
        engine.apply(Command::SetSource {
            id: id.clone(),
            position,
            gain,
        })?;
        engine.render_block_into(&mut block);
        let start = b * cfg.block;
        for (dst, src) in buffer.channels.iter_mut().zip(&block.channels) {
            dst[start..start + cfg.block].copy_from_slice(src);
        }
    }
    Ok(buffer)
}
