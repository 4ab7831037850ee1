//! Perceived-intensity analysis and fixed-carrier resynthesis.
//!
//! Analysis weights the input with a second-order band-pass standing in for
//! the skin's frequency-dependent sensitivity, then takes a windowed RMS at a
//! fixed hop. Synthesis goes the other way: it drives a single carrier with an
//! amplitude chosen so that analysing the result returns the same envelope.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLE_RATE: u32 = 8_000;
pub const MAX_SAMPLE_RATE: u32 = 192_000;

/// Peak level every preset is normalized to.
pub const PRESET_PEAK: f64 = 0.8;

/// Length of the looped preset material used by the real-time engine.
pub const PRESET_LOOP_SECONDS: f64 = 2.0;

/// Mono signal with samples in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        check_sample_rate(sample_rate, "sample_rate")?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::param(
                "samples",
                format!("sample {i} is {} (must be finite, within [-1, 1])", samples[i]),
            ));
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Self {
        Waveform {
            samples: vec![0.0; len],
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

pub(crate) fn check_sample_rate(sample_rate: u32, field: &str) -> Result<()> {
    if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&sample_rate) {
        return Err(Error::param(
            field,
            format!("{sample_rate} Hz is outside [{MIN_SAMPLE_RATE}, {MAX_SAMPLE_RATE}]"),
        ));
    }
    Ok(())
}

/// Perceived intensity sampled every `hop` seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityEnvelope {
    pub values: Vec<f64>,
    /// Frame spacing in seconds.
    pub hop: f64,
    /// Sample rate of the waveform the envelope was measured on.
    pub origin_rate: u32,
}

impl IntensityEnvelope {
    pub fn new(values: Vec<f64>, hop: f64, origin_rate: u32) -> Result<Self> {
        if !hop.is_finite() || hop <= 0.0 {
            return Err(Error::param("hop", "must be finite and > 0"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("values", "must be finite and >= 0"));
        }
        Ok(IntensityEnvelope {
            values,
            hop,
            origin_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.hop
    }

    /// Linear interpolation between frames (frame `m` sits at `m * hop`),
    /// holding the end values outside the covered range. Empty envelopes read 0.
    pub fn value_at(&self, t: f64) -> f64 {
        interpolate_frames(&self.values, t / self.hop)
    }

    /// Like [`value_at`](Self::value_at) but treating the envelope as periodic
    /// with period `duration()`.
    pub fn value_at_looped(&self, t: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let pos = (t / self.hop).rem_euclid(n as f64);
        let i = pos.floor() as usize % n;
        let frac = pos - pos.floor();
        let a = self.values[i];
        let b = self.values[(i + 1) % n];
        a + (b - a) * frac
    }
}

fn interpolate_frames(values: &[f64], pos: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        _ if pos <= 0.0 => values[0],
        n if pos >= (n - 1) as f64 => values[n - 1],
        _ => {
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            values[i] + (values[i + 1] - values[i]) * frac
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    /// Output carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Analysis window length in seconds.
    pub window: f64,
    /// Analysis hop in seconds.
    pub hop: f64,
    /// Center of the sensitivity band-pass in Hz.
    pub sens_center_hz: f64,
    /// Quality factor of the sensitivity band-pass.
    pub sens_q: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            carrier_hz: 200.0,
            window: 0.010,
            hop: 0.005,
            sens_center_hz: 250.0,
            sens_q: 0.7,
        }
    }
}

impl SignalConfig {
    pub fn validate(&self, prefix: &str, sample_rate: u32) -> Result<()> {
        let field = |name: &str| {
            if prefix.is_empty() {
                name.to_string()
            } else {
                format!("{prefix}.{name}")
            }
        };
        let nyquist = sample_rate as f64 / 2.0;
        if !self.hop.is_finite() || self.hop <= 0.0 {
            return Err(Error::param(field("hop"), "must be finite and > 0"));
        }
        if !self.window.is_finite() || self.window < self.hop {
            return Err(Error::param(field("window"), "must be finite and >= hop"));
        }
        let max_carrier = sample_rate as f64 / 4.0;
        if !(self.carrier_hz >= 100.0 && self.carrier_hz <= max_carrier) {
            return Err(Error::param(
                field("carrier_hz"),
                format!("{} Hz is outside [100, {max_carrier}]", self.carrier_hz),
            ));
        }
        if !(self.sens_center_hz > 0.0 && self.sens_center_hz < nyquist) {
            return Err(Error::param(field("sens_center_hz"), "must lie strictly between 0 and Nyquist"));
        }
        if !self.sens_q.is_finite() || self.sens_q <= 0.0 {
            return Err(Error::param(field("sens_q"), "must be finite and > 0"));
        }
        Ok(())
    }

    pub(crate) fn hop_samples(&self, sample_rate: u32) -> usize {
        ((self.hop * sample_rate as f64).round() as usize).max(1)
    }

    pub(crate) fn window_samples(&self, sample_rate: u32) -> usize {
        ((self.window * sample_rate as f64).round() as usize).max(self.hop_samples(sample_rate))
    }
}

/// Band-pass biquad with unity gain at its center frequency
/// (bilinear-transform design with prewarped center).
#[derive(Clone, Copy, Debug)]
pub struct SensitivityFilter {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    sample_rate: f64,
}

impl SensitivityFilter {
    pub fn new(center_hz: f64, q: f64, sample_rate: u32) -> Self {
        let w0 = TAU * center_hz / sample_rate as f64;
        let alpha = w0.sin() / (2.0 * q);
        let a0 = 1.0 + alpha;
        SensitivityFilter {
            b0: alpha / a0,
            b2: -alpha / a0,
            a1: -2.0 * w0.cos() / a0,
            a2: (1.0 - alpha) / a0,
            sample_rate: sample_rate as f64,
        }
    }

    pub fn from_config(cfg: &SignalConfig, sample_rate: u32) -> Self {
        Self::new(cfg.sens_center_hz, cfg.sens_q, sample_rate)
    }

    /// Magnitude response at `freq_hz`, from the transfer function.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let w = TAU * freq_hz / self.sample_rate;
        // H(z) = (b0 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2) at z = e^{jw}
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let num = (self.b0 + self.b2 * c2, self.b2 * s2);
        let den = (1.0 + self.a1 * c1 + self.a2 * c2, self.a1 * s1 + self.a2 * s2);
        (num.0.hypot(num.1)) / (den.0.hypot(den.1))
    }

    /// Filters `input` from zero state (direct form I).
    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len());
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for &x in input {
            let y = self.b0 * x + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
            x2 = x1;
            x1 = x;
            y2 = y1;
            y1 = y;
            out.push(y);
        }
        out
    }
}

/// Applies the perceptual sensitivity weighting.
pub fn sensitivity_filter(w: &Waveform, cfg: &SignalConfig) -> Waveform {
    let filter = SensitivityFilter::from_config(cfg, w.sample_rate);
    Waveform {
        samples: filter.process(&w.samples),
        sample_rate: w.sample_rate,
    }
}

/// Windowed RMS of the weighted signal.
///
/// Frame `m` covers the `window` seconds ending at sample `m * hop`
/// (inclusive); samples before the start count as silence. There are
/// `ceil(len / hop)` frames.
pub fn perceived_intensity_envelope(w: &Waveform, cfg: &SignalConfig) -> IntensityEnvelope {
    let filtered = SensitivityFilter::from_config(cfg, w.sample_rate).process(&w.samples);
    let hop = cfg.hop_samples(w.sample_rate);
    let frames = w.samples.len().div_ceil(hop);
    windowed_rms(&filtered, 0, frames, hop, cfg.window_samples(w.sample_rate), w.sample_rate)
}

/// Envelope of `w` treated as one period of a looping signal: the filter
/// starts settled and windows wrap around the start.
pub fn perceived_intensity_envelope_periodic(w: &Waveform, cfg: &SignalConfig) -> IntensityEnvelope {
    let n = w.samples.len();
    let hop = cfg.hop_samples(w.sample_rate);
    let window = cfg.window_samples(w.sample_rate);
    if n == 0 {
        return windowed_rms(&[], 0, 0, hop, window, w.sample_rate);
    }
    // enough copies to cover the window and settle the filter
    let copies = 1 + window.div_ceil(n).max(1);
    let mut looped = Vec::with_capacity(n * copies);
    for _ in 0..copies {
        looped.extend_from_slice(&w.samples);
    }
    let filtered = SensitivityFilter::from_config(cfg, w.sample_rate).process(&looped);
    windowed_rms(&filtered, (copies - 1) * n, n.div_ceil(hop), hop, window, w.sample_rate)
}

fn windowed_rms(
    filtered: &[f64],
    start: usize,
    frames: usize,
    hop: usize,
    window: usize,
    sample_rate: u32,
) -> IntensityEnvelope {
    let mut prefix = Vec::with_capacity(filtered.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for y in filtered {
        acc += y * y;
        prefix.push(acc);
    }
    let values = (0..frames)
        .map(|m| {
            let end = start + m * hop + 1;
            let begin = end.saturating_sub(window);
            let energy = (prefix[end] - prefix[begin]).max(0.0);
            (energy / window as f64).sqrt()
        })
        .collect();
    IntensityEnvelope {
        values,
        hop: hop as f64 / sample_rate as f64,
        origin_rate: sample_rate,
    }
}

/// Carrier amplitude that analyses back to perceived intensity `intensity`.
pub fn carrier_amplitude(intensity: f64, carrier_gain: f64) -> f64 {
    SQRT_2 * intensity / carrier_gain
}

#[derive(Clone, Debug, PartialEq)]
pub struct Synthesis {
    pub waveform: Waveform,
    /// Number of samples that had to be clipped to `[-1, 1]`.
    pub clipped: usize,
}

/// Amplitude-modulates a sine carrier with `env`.
///
/// The amplitude curve is read half a window ahead so that the trailing
/// analysis window is centered on the frame it reproduces.
pub fn synthesize_am_carrier(env: &IntensityEnvelope, cfg: &SignalConfig, sample_rate: u32) -> Synthesis {
    let hop = cfg.hop_samples(sample_rate);
    let lead = (cfg.window_samples(sample_rate) as f64 - 1.0) / 2.0;
    let gain = SensitivityFilter::from_config(cfg, sample_rate).gain_at(cfg.carrier_hz);
    let len = env.values.len() * hop;
    let frame_pos_per_sample = 1.0 / (env.hop * sample_rate as f64);
    let phase_inc = TAU * cfg.carrier_hz / sample_rate as f64;
    let mut phase = 0.0f64;
    let mut clipped = 0;
    let mut samples = Vec::with_capacity(len);
    for n in 0..len {
        let a = carrier_amplitude(
            interpolate_frames(&env.values, (n as f64 + lead) * frame_pos_per_sample),
            gain,
        );
        let mut y = a * phase.sin();
        if y.abs() > 1.0 {
            clipped += 1;
            y = y.clamp(-1.0, 1.0);
        }
        samples.push(y);
        phase = wrap_phase(phase + phase_inc);
    }
    Synthesis {
        waveform: Waveform {
            samples,
            sample_rate,
        },
        clipped,
    }
}

pub(crate) fn wrap_phase(phase: f64) -> f64 {
    if phase >= TAU {
        phase - TAU
    } else {
        phase
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Sine,
    Footstep,
    Rumble,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Sine, Preset::Footstep, Preset::Rumble];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sine => "sine",
            Preset::Footstep => "footstep",
            Preset::Rumble => "rumble",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Step interval of the footstep preset, in seconds.
const STEP_INTERVAL: f64 = 0.5;
const STEP_ONSET: f64 = 0.05;
const STEP_DECAY: f64 = 0.035;

/// Generates one of the built-in test signals, peak-normalized to 0.8.
pub fn preset_signal(preset: Preset, duration: f64, cfg: &SignalConfig, sample_rate: u32) -> Result<Waveform> {
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::param("duration", "must be finite and >= 0"));
    }
    check_sample_rate(sample_rate, "sample_rate")?;
    let sr = sample_rate as f64;
    let len = (duration * sr).round() as usize;
    let fc = cfg.carrier_hz;
    let mut samples: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64 / sr;
            match preset {
                Preset::Sine => (TAU * fc * t).sin(),
                Preset::Footstep => {
                    let since = (t - STEP_ONSET).rem_euclid(STEP_INTERVAL);
                    if t < STEP_ONSET {
                        return 0.0;
                    }
                    let attack = (since / 0.002).min(1.0);
                    let env = attack * (-since / STEP_DECAY).exp();
                    env * (0.7 * (TAU * fc * since).sin() + 0.3 * (PI * fc * since).sin())
                }
                Preset::Rumble => {
                    let slow = 0.55 + 0.45 * (TAU * 0.5 * t).sin();
                    let flutter = 0.8 + 0.2 * (TAU * 2.5 * t).sin();
                    slow * flutter * (TAU * fc * t).sin()
                }
            }
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let scale = PRESET_PEAK / peak;
        samples.iter_mut().for_each(|s| *s *= scale);
    }
    Ok(Waveform {
        samples,
        sample_rate,
    })
}
