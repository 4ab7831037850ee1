// Offline render of a source circling the wearer.
//
// Builds the 8 s, 0.5 m orbit, renders it on the jacket layout, writes a
// WAV file and reports when each channel peaks. With `--write-data` the
// orbit is also written back to `data/orbit.csv`.

use std::error::Error;

use vibropan::io::{load_layout_file, write_trajectory_csv, write_wav, SampleFormat, WavSpec};
use vibropan::render::{orbit_trajectory, render_trajectory, TrajectorySignal};
use vibropan::{PanningParams, Preset, RenderConfig, SignalConfig, Vec3};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let write_data = std::env::args().any(|a| a == "--write-data");
    let layout = load_layout_file(&vibropan::data_dir().join("jacket_layout.json"))?;
    let orbit = orbit_trajectory(layout.perceived_origin(), 0.5, 8.0, 100, 1.0)?;
    if write_data {
        std::fs::write(vibropan::data_dir().join("orbit.csv"), write_trajectory_csv(&orbit))?;
    }

    let cfg = RenderConfig::default();
    let buf = render_trajectory(
        &orbit,
        &TrajectorySignal::Preset(Preset::Sine),
        &layout,
        &PanningParams::default(),
        &SignalConfig::default(),
        &cfg,
    )?;
    let spec = WavSpec {
        format: SampleFormat::Float32,
        channels: buf.channels.len() as u16,
        sample_rate: buf.sample_rate,
    };
    let out = std::env::temp_dir().join("vibropan_orbit.wav");
    std::fs::write(&out, write_wav(&buf, &spec)?)?;
    println!("wrote {} ({:.2} s, {} channels)", out.display(), buf.duration(), buf.channels.len());

    let peaks = buf.energy_peak_times(cfg.block);
    for (k, (t, a)) in peaks.iter().zip(layout.offsets()).enumerate() {
        let az = Vec3::new(a.x, a.y, 0.0).azimuth().to_degrees();
        println!("ch{k}: azimuth {az:6.1} deg, energy peak at {t:5.2} s");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
