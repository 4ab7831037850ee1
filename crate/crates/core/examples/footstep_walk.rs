// Footsteps approaching from ahead, passing underneath and fading behind.
//
// Renders the shipped walk trajectory with the footstep preset, writes a
// 16-bit WAV and prints front/back channel levels second by second.

use std::error::Error;

use vibropan::io::{load_layout_file, load_trajectory_file, write_wav, SampleFormat, WavSpec};
use vibropan::render::{render_trajectory, TrajectorySignal};
use vibropan::{PanningParams, Preset, RenderConfig, SignalConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = vibropan::data_dir();
    let layout = load_layout_file(&data.join("jacket_layout.json"))?;
    let walk = load_trajectory_file(&data.join("footstep_walk.csv"))?;
    let cfg = RenderConfig::default();
    let buf = render_trajectory(
        &walk,
        &TrajectorySignal::Preset(Preset::Footstep),
        &layout,
        &PanningParams::default(),
        &SignalConfig::default(),
        &cfg,
    )?;
    let spec = WavSpec {
        format: SampleFormat::Pcm16,
        channels: buf.channels.len() as u16,
        sample_rate: buf.sample_rate,
    };
    let out = std::env::temp_dir().join("vibropan_footstep_walk.wav");
    std::fs::write(&out, write_wav(&buf, &spec)?)?;
    println!("wrote {} ({:.1} s)", out.display(), buf.duration());

    // front channels have y > 0, back channels y < 0
    let front: Vec<usize> = (0..layout.len()).filter(|&k| layout.offsets()[k].y > 0.0).collect();
    let back: Vec<usize> = (0..layout.len()).filter(|&k| layout.offsets()[k].y < 0.0).collect();
    let energy = buf.windowed_energy(buf.sample_rate as usize);
    let level = |chs: &[usize], s: usize| chs.iter().map(|&k| energy[k][s]).sum::<f64>().sqrt();
    println!("  t    front   back");
    for s in 0..energy[0].len() {
        println!("{:>3}s  {:.4}  {:.4}", s, level(&front, s), level(&back, s));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
