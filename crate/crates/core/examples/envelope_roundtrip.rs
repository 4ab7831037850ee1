// Perceived-intensity analysis and carrier resynthesis.
//
// A slowly varying intensity curve is turned into an amplitude-modulated
// carrier and analysed again; the presets are summarised for reference.

use std::error::Error;

use vibropan::signal::{perceived_intensity_envelope, preset_signal, synthesize_am_carrier};
use vibropan::{IntensityEnvelope, Preset, SignalConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = SignalConfig::default();
    let sr = 48_000;

    let frames = 400;
    let values: Vec<f64> = (0..frames)
        .map(|m| {
            let t = m as f64 * cfg.hop;
            0.3 + 0.12 * (std::f64::consts::TAU * 0.8 * t).sin() + 0.05 * (std::f64::consts::TAU * 2.9 * t + 1.0).sin()
        })
        .collect();
    let env = IntensityEnvelope::new(values, cfg.hop, sr)?;
    let synth = synthesize_am_carrier(&env, &cfg, sr);
    let back = perceived_intensity_envelope(&synth.waveform, &cfg);

    // frames within one analysis window of either end carry start-up effects
    let edge = (cfg.window / cfg.hop).floor() as usize + 1;
    let worst = (edge..frames - edge)
        .map(|m| (back.values[m] - env.values[m]).abs() / env.values[m])
        .fold(0.0, f64::max);
    println!(
        "smooth curve: {frames} frames, carrier peak {:.3}, {} clipped, worst relative error {:.3}%",
        synth.waveform.peak(),
        synth.clipped,
        100.0 * worst
    );
    for m in [edge, 100, 200, 300] {
        println!("  frame {m:>3}: target {:.4}  analysed {:.4}", env.values[m], back.values[m]);
    }

    println!("\npresets over 2 s:");
    for preset in Preset::ALL {
        let wave = preset_signal(preset, 2.0, &cfg, sr)?;
        let e = perceived_intensity_envelope(&wave, &cfg);
        let peak = e.values.iter().cloned().fold(0.0, f64::max);
        let mean = e.values.iter().sum::<f64>() / e.len() as f64;
        println!("  {preset:>8}: peak intensity {peak:.4}, mean {mean:.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
