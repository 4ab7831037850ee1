mod common;

use common::*;
use proptest::prelude::*;
use vibropan::signal::{
    carrier_amplitude, perceived_intensity_envelope, perceived_intensity_envelope_periodic, preset_signal,
    synthesize_am_carrier, SensitivityFilter, PRESET_PEAK,
};
use vibropan::{IntensityEnvelope, Preset, SignalConfig, Waveform};

const SR: u32 = 48_000;

fn edge_frames(cfg: &SignalConfig) -> usize {
    (cfg.window / cfg.hop).floor() as usize + 1
}

fn dft_magnitude(x: &[f64], freq: f64, sr: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (n, s) in x.iter().enumerate() {
        let ph = std::f64::consts::TAU * freq * n as f64 / sr;
        re += s * ph.cos();
        im -= s * ph.sin();
    }
    (re * re + im * im).sqrt() / x.len() as f64
}

#[test]
fn filter_gain_matches_frozen_reference() {
    let f = SensitivityFilter::new(250.0, 0.7, SR);
    assert!((f.gain_at(250.0) - 1.0).abs() < 1e-12);
    assert!((f.gain_at(200.0) - 0.9537860425134551).abs() < 1e-12);
    assert!((f.gain_at(25.0) - 0.1428082483805456).abs() < 1e-12);
    assert!((carrier_amplitude(0.1, f.gain_at(200.0)) - 0.14827366928607).abs() < 1e-12);
}

#[test]
fn filter_steady_state_agrees_with_analytic_gain() {
    let f = SensitivityFilter::new(250.0, 0.7, SR);
    for freq in [60.0, 200.0, 250.0, 600.0] {
        let x: Vec<f64> = (0..SR as usize).map(|n| (std::f64::consts::TAU * freq * n as f64 / SR as f64).sin()).collect();
        let y = f.process(&x);
        let tail = &y[SR as usize / 2..];
        let measured = 2.0 * dft_magnitude(tail, freq, SR as f64);
        assert!((measured - f.gain_at(freq)).abs() < 2e-3, "{freq}: {measured} vs {}", f.gain_at(freq));
    }
}

#[test]
fn envelope_has_one_frame_per_hop() {
    let cfg = SignalConfig::default();
    for len in [0, 1, 239, 240, 241, 4800] {
        let env = perceived_intensity_envelope(&Waveform::silence(len, SR), &cfg);
        assert_eq!(env.len(), len.div_ceil(240), "len {len}");
        assert!(env.values.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn steady_carrier_analyses_to_rms_times_gain() {
    let cfg = SignalConfig::default();
    let wave = preset_signal(Preset::Sine, 1.0, &cfg, SR).unwrap();
    let env = perceived_intensity_envelope(&wave, &cfg);
    let g = SensitivityFilter::from_config(&cfg, SR).gain_at(cfg.carrier_hz);
    let expected = PRESET_PEAK / 2f64.sqrt() * g;
    for &v in &env.values[10..] {
        assert!((v - expected).abs() / expected < 1e-3, "{v} vs {expected}");
    }
}

#[test]
fn periodic_envelope_of_a_loop_has_no_onset_dip() {
    let cfg = SignalConfig::default();
    let wave = preset_signal(Preset::Sine, 2.0, &cfg, SR).unwrap();
    let env = perceived_intensity_envelope_periodic(&wave, &cfg);
    let (lo, hi) = env.values.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    assert!((hi - lo) / hi < 1e-3, "{lo}..{hi}");
}

#[test]
fn presets_are_peak_normalized_and_named() {
    let cfg = SignalConfig::default();
    for p in Preset::ALL {
        let w = preset_signal(p, 2.0, &cfg, SR).unwrap();
        assert_eq!(w.len(), 96_000);
        assert!((w.peak() - PRESET_PEAK).abs() < 1e-12, "{p}");
        assert_eq!(p.name().parse::<Preset>().unwrap(), p);
    }
    assert!("thunder".parse::<Preset>().is_err());
    assert!(preset_signal(Preset::Sine, -1.0, &cfg, SR).is_err());
    assert!(preset_signal(Preset::Sine, 1.0, &cfg, 1000).is_err());
}

#[test]
fn constant_envelope_synthesizes_a_pure_carrier() {
    let cfg = SignalConfig::default();
    let env = IntensityEnvelope::new(vec![0.1; 200], cfg.hop, SR).unwrap();
    let s = synthesize_am_carrier(&env, &cfg, SR);
    assert_eq!(s.clipped, 0);
    assert_eq!(s.waveform.len(), 200 * 240);
    let a = 0.14827366928607;
    for (n, y) in s.waveform.samples.iter().enumerate() {
        let want = a * (std::f64::consts::TAU * 200.0 * n as f64 / SR as f64).sin();
        assert!((y - want).abs() < 1e-9, "sample {n}");
    }
}

#[test]
fn carrier_phase_is_continuous_across_amplitude_changes() {
    let cfg = SignalConfig::default();
    let values: Vec<f64> = (0..400).map(|m| if (m / 40) % 2 == 0 { 0.1 } else { 0.4 }).collect();
    let env = IntensityEnvelope::new(values, cfg.hop, SR).unwrap();
    let s = synthesize_am_carrier(&env, &cfg, SR);
    let amax = carrier_amplitude(0.4, SensitivityFilter::from_config(&cfg, SR).gain_at(cfg.carrier_hz));
    // a continuous carrier moves at most amax * phase step per sample, plus the ramp
    let step = std::f64::consts::TAU * cfg.carrier_hz / SR as f64;
    let ramp = amax / 240.0;
    for w in s.waveform.samples.windows(2) {
        assert!((w[1] - w[0]).abs() <= amax * step + ramp + 1e-12);
    }
    let x = &s.waveform.samples;
    let sr = SR as f64;
    let at_carrier = dft_magnitude(x, cfg.carrier_hz, sr);
    for off in [-60.0, -30.0, 30.0, 60.0, 120.0] {
        assert!(dft_magnitude(x, cfg.carrier_hz + off, sr) < at_carrier / 5.0, "{off}");
    }
}

#[test]
fn loud_envelopes_are_clipped_and_counted() {
    let cfg = SignalConfig::default();
    let env = IntensityEnvelope::new(vec![2.0; 20], cfg.hop, SR).unwrap();
    let s = synthesize_am_carrier(&env, &cfg, SR);
    assert!(s.clipped > 0);
    assert!(s.waveform.peak() <= 1.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(Waveform::new(vec![0.0, f64::NAN], SR).is_err());
    assert!(IntensityEnvelope::new(vec![-0.1], 0.005, SR).is_err());
    let bad = SignalConfig {
        hop: 0.02,
        ..SignalConfig::default()
    };
    assert!(bad.validate("signal", SR).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_is_scale_linear(seed in any::<u64>(), k in 0.0f64..4.0) {
        let mut rng = rng(seed);
        let cfg = SignalConfig::default();
        let x: Vec<f64> = (0..2400).map(|_| rand::Rng::gen_range(&mut rng, -0.2..0.2)).collect();
        let a = perceived_intensity_envelope(&Waveform::new(x.clone(), SR).unwrap(), &cfg);
        let b = perceived_intensity_envelope(&Waveform::new(x.iter().map(|s| s * k).collect(), SR).unwrap(), &cfg);
        for (u, w) in a.values.iter().zip(&b.values) {
            prop_assert!((u * k - w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn smooth_envelopes_survive_synthesis_and_analysis(seed in any::<u64>()) {
        let cfg = SignalConfig::default();
        let mut rng = rng(seed);
        let values = smooth_envelope(&mut rng, 300, cfg.hop);
        let env = IntensityEnvelope::new(values, cfg.hop, SR).unwrap();
        let s = synthesize_am_carrier(&env, &cfg, SR);
        let back = perceived_intensity_envelope(&s.waveform, &cfg);
        let edge = edge_frames(&cfg);
        for m in edge..env.len() - edge {
            let rel = (back.values[m] - env.values[m]).abs() / env.values[m];
            prop_assert!(rel <= 0.05, "frame {} off by {}", m, rel);
        }
    }
}
