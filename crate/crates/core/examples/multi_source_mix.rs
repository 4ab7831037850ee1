// Several sources sharing one layout through the block engine.
//
// Channel intensities add across sources; the engine ramps each channel
// toward the summed target under its slew limit.

use std::error::Error;

use vibropan::render::Command;
use vibropan::{Engine, PanningParams, Preset, RenderConfig, SignalConfig, SourceSignal, Vec3, VirtualSource};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let layout = vibropan::io::load_layout_file(&vibropan::data_dir().join("jacket_layout.json"))?;
    let params = PanningParams::default();
    let signal_cfg = SignalConfig::default();
    let cfg = RenderConfig::default();
    let mut engine = Engine::new(layout.clone(), params, signal_cfg, cfg)?;

    let sources = [
        ("left", Vec3::new(-0.6, 0.1, 0.0), 0.6, SourceSignal::Constant(0.4)),
        ("right", Vec3::new(0.5, 0.3, 0.0), 0.8, SourceSignal::Constant(0.3)),
        ("below", Vec3::new(0.0, 0.0, -0.5), 1.0, SourceSignal::preset(Preset::Rumble, &signal_cfg, cfg.sample_rate)?),
    ];
    for (id, position, gain, signal) in &sources {
        engine.apply(Command::SetSignal {
            id: id.to_string(),
            signal: signal.clone(),
        })?;
        engine.apply(Command::SetSource {
            id: id.to_string(),
            position: *position,
            gain: *gain,
        })?;
    }

    // the engine's targets equal the sum of per-source contributions
    let targets = engine.channel_targets();
    let pairs: Vec<(VirtualSource, f64)> = sources
        .iter()
        .map(|(id, p, g, s)| Ok((VirtualSource::new(*id, *p, *g)?, s.intensity_at(0.0))))
        .collect::<vibropan::Result<_>>()?;
    let summed = layout.channel_intensities(&pairs, &params);
    println!("ch   target   summed");
    for k in 0..layout.len() {
        println!("{k:>2}  {:.5}  {:.5}", targets[k], summed[k]);
    }

    let mut peaks = vec![0f32; layout.len()];
    for _ in 0..200 {
        let block = engine.render_block();
        for (p, ch) in peaks.iter_mut().zip(&block.channels) {
            *p = ch.iter().fold(*p, |m, s| m.max(s.abs()));
        }
    }
    println!("\nafter {:.2} s, per-channel peaks: {:?}", engine.time(), peaks);

    engine.apply(Command::RemoveSource { id: "below".into() })?;
    println!("removed 'below', {} sources left", engine.source_count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
