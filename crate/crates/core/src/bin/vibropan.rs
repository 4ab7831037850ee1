use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use vibropan::io::{self, ConfigDocument, SampleFormat, WavSpec};
use vibropan::localization::panning_weight;
use vibropan::render::{render_trajectory, TrajectorySignal};
use vibropan::service::{Service, ServiceConfig};
use vibropan::signal::perceived_intensity_envelope;
use vibropan::{attenuation, ActuatorLayout, Engine, Error, Preset, Vec3, Waveform};

/// Spatial vibrotactile renderer.
#[derive(Parser)]
#[command(name = "vibropan", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render a source trajectory to a multichannel WAV file.
    Render(RenderArgs),
    /// Print direction cosines and distribution ratios for one source position.
    Weights(WeightsArgs),
    /// Print the perceived-intensity envelope of a WAV file as CSV.
    Analyze(AnalyzeArgs),
    /// Run the WebSocket control service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RenderArgs {
    /// Actuator layout JSON; defaults to the config's `layout` entry.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Keyframe CSV with header t,x,y,z,gain.
    #[arg(long)]
    trajectory: PathBuf,
    /// Preset name (sine, footstep, rumble) or path to a mono WAV file.
    #[arg(long, default_value = "sine")]
    signal: String,
    /// Tuning document; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output WAV path.
    #[arg(long)]
    out: PathBuf,
    /// Sample encoding of the output file.
    #[arg(long, value_enum, default_value_t = Format::Pcm16)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pcm16,
    Float32,
}

#[derive(Args)]
struct WeightsArgs {
    /// Actuator layout JSON; defaults to the config's `layout` entry.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Source position as x,y,z in meters.
    #[arg(long, allow_hyphen_values = true)]
    pos: String,
    /// Tuning document; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the direction sharpness exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Override the near-field radius in meters.
    #[arg(long)]
    rho0: Option<f64>,
    /// Override the attenuation exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Override the uniform-blend radius around the origin.
    #[arg(long)]
    blend_radius: Option<f64>,
    /// Print the table as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// WAV file to analyse.
    #[arg(long = "in")]
    input: PathBuf,
    /// Tuning document; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Channel to analyse in a multichannel file.
    #[arg(long)]
    channel: Option<usize>,
}

#[derive(Args)]
struct ServeArgs {
    /// Actuator layout JSON; defaults to the config's `layout` entry.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Tuning document; omitted fields keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 9420)]
    port: u16,
}

/// Input problems exit with 2, everything else with 1.
enum Failure {
    Input(Error),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Render(a) => cmd_render(a),
        Cmd::Weights(a) => cmd_weights(a),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigDocument, Error> {
    match path {
        Some(p) => io::load_config_file(p),
        None => Ok(ConfigDocument::default()),
    }
}

/// Explicit `--layout`, else the config's `layout` relative to the config file.
fn resolve_layout(flag: Option<&Path>, config: &ConfigDocument, config_path: Option<&Path>) -> Result<ActuatorLayout, Error> {
    let path = match (flag, &config.layout) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(rel)) => config_path
            .and_then(Path::parent)
            .map_or_else(|| PathBuf::from(rel), |dir| dir.join(rel)),
        (None, None) => {
            return Err(Error::InvalidParameter {
                field: "--layout".into(),
                reason: "no layout given on the command line or in the config".into(),
            })
        }
    };
    io::load_layout_file(&path)
}

fn read_wav_file(path: &Path) -> Result<(vibropan::MultichannelBuffer, WavSpec), Error> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(e).in_file(path))?;
    io::read_wav(&bytes).map_err(|e| Error::from(e).in_file(path))
}

fn mono_waveform(buf: &vibropan::MultichannelBuffer, channel: Option<usize>, path: &Path) -> Result<Waveform, Error> {
    let n = buf.channels.len();
    let index = match channel {
        Some(c) if c < n => c,
        Some(c) => {
            return Err(Error::InvalidParameter {
                field: "--channel".into(),
                reason: format!("{c} is out of range for a {n}-channel file"),
            }
            .in_file(path))
        }
        None if n == 1 => 0,
        None => {
            return Err(Error::InvalidParameter {
                field: "channels".into(),
                reason: format!("input has {n} channels; select one with --channel <index>"),
            }
            .in_file(path))
        }
    };
    let samples = buf.channels[index].iter().map(|&s| s as f64).collect();
    Waveform::new(samples, buf.sample_rate).map_err(|e| e.in_file(path))
}

fn cmd_render(a: RenderArgs) -> Result<(), Failure> {
    let config = load_config(a.config.as_deref())?;
    let layout = resolve_layout(a.layout.as_deref(), &config, a.config.as_deref())?;
    let traj = io::load_trajectory_file(&a.trajectory)?;
    let signal = match a.signal.parse::<Preset>() {
        Ok(p) => TrajectorySignal::Preset(p),
        Err(_) => {
            let path = Path::new(&a.signal);
            let (buf, _) = read_wav_file(path)?;
            TrajectorySignal::Waveform(mono_waveform(&buf, None, path)?)
        }
    };
    let buf = render_trajectory(&traj, &signal, &layout, &config.panning, &config.signal, &config.render)?;
    let spec = WavSpec {
        format: match a.format {
            Format::Pcm16 => SampleFormat::Pcm16,
            Format::Float32 => SampleFormat::Float32,
        },
        channels: buf.channels.len() as u16,
        sample_rate: buf.sample_rate,
    };
    let bytes = io::write_wav(&buf, &spec).map_err(|e| Error::from(e).in_file(&a.out))?;
    std::fs::write(&a.out, bytes).map_err(|e| Error::Io(e).in_file(&a.out))?;
    println!("wrote {}", a.out.display());
    println!("duration: {:.3} s", buf.duration());
    println!("channels: {}", buf.channels.len());
    for (k, peak) in buf.peaks().iter().enumerate() {
        println!("peak[{k}]: {peak:.6}");
    }
    Ok(())
}

fn parse_position(text: &str) -> Result<Vec3, Error> {
    let bad = || Error::InvalidParameter {
        field: "--pos".into(),
        reason: format!("expected x,y,z in meters, got {text:?}"),
    };
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] if x.is_finite() && y.is_finite() && z.is_finite() => Ok(Vec3::new(x, y, z)),
        _ => Err(bad()),
    }
}

#[derive(Serialize)]
struct WeightRow {
    k: usize,
    u: Option<f64>,
    w: Option<f64>,
    r: f64,
}

#[derive(Serialize)]
struct WeightTable {
    origin: Vec3,
    position: Vec3,
    distance: f64,
    gamma: f64,
    attenuation: f64,
    actuators: Vec<WeightRow>,
    sum_r: f64,
}

fn cmd_weights(a: WeightsArgs) -> Result<(), Failure> {
    let config = load_config(a.config.as_deref())?;
    let layout = resolve_layout(a.layout.as_deref(), &config, a.config.as_deref())?;
    let pos = parse_position(&a.pos)?;
    let mut params = config.panning;
    params.gamma = a.gamma.unwrap_or(params.gamma);
    params.rho0 = a.rho0.unwrap_or(params.rho0);
    params.beta = a.beta.unwrap_or(params.beta);
    params.blend_radius = a.blend_radius.unwrap_or(params.blend_radius);
    params.validate("")?;

    let origin = layout.perceived_origin();
    let cosines = layout.direction_cosines(pos).ok();
    let weights = layout.distribute(pos, &params);
    let table = WeightTable {
        origin,
        position: pos,
        distance: pos.distance(origin),
        gamma: params.gamma,
        attenuation: attenuation(pos, origin, &params),
        actuators: weights
            .r
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let u = cosines.as_ref().map(|u| u[k]);
                WeightRow {
                    k,
                    u,
                    w: u.map(|u| panning_weight(u, params.gamma)),
                    r,
                }
            })
            .collect(),
        sum_r: weights.sum(),
    };

    if a.json {
        println!("{}", serde_json::to_string_pretty(&table).expect("table serializes"));
        return Ok(());
    }
    let o = table.origin;
    println!("origin: {:.6},{:.6},{:.6}", o.x, o.y, o.z);
    println!("distance: {:.9}", table.distance);
    println!("attenuation: {:.9}", table.attenuation);
    println!("{:>3} {:>12} {:>12} {:>12}", "k", "u", "w", "r");
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.9}"));
    for row in &table.actuators {
        println!("{:>3} {:>12} {:>12} {:>12.9}", row.k, fmt(row.u), fmt(row.w), row.r);
    }
    println!("sum_r: {:.9}", table.sum_r);
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let config = load_config(a.config.as_deref())?;
    let (buf, _) = read_wav_file(&a.input)?;
    let wave = mono_waveform(&buf, a.channel, &a.input)?;
    config
        .signal
        .validate("signal", wave.sample_rate)
        .map_err(|e| e.in_file(&a.input))?;
    let env = perceived_intensity_envelope(&wave, &config.signal);
    let mut out = String::with_capacity(env.len() * 24 + 16);
    out.push_str("t,intensity\n");
    for (m, v) in env.values.iter().enumerate() {
        out.push_str(&format!("{:.6},{:.9}\n", m as f64 * env.hop, v));
    }
    print!("{out}");
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let config = load_config(a.config.as_deref())?;
    let layout = resolve_layout(a.layout.as_deref(), &config, a.config.as_deref())?;
    let engine = Engine::new(layout, config.panning, config.signal, config.render)?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| Failure::Input(Error::InvalidParameter {
            field: "--host".into(),
            reason: format!("{e}"),
        }))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
    runtime.block_on(async move {
        let service = Service::start(engine, ServiceConfig::new(addr))
            .await
            .map_err(|e| Failure::Runtime(format!("cannot listen on {addr}: {e}")))?;
        println!("listening on ws://{}", service.local_addr());
        tokio::signal::ctrl_c()
            .await
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        log::info!("shutting down");
        let report = service.shutdown().await;
        log::info!("rendered {} blocks", report.blocks);
        Ok(())
    })
}
