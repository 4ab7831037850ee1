//! JSON wire protocol, version 1.
//!
//! Clients send text frames such as
//!
//! ```json
//! {"type": "set_source", "id": "dino", "pos": [0.5, 0.0, 0.0], "gain": 1.0, "seq": 7}
//! {"type": "set_signal", "id": "dino", "preset": "footstep", "carrier_hz": 180}
//! {"type": "remove_source", "id": "dino"}
//! {"type": "subscribe_telemetry", "rate_hz": 30}
//! ```
//!
//! Every inbound frame gets exactly one `ack` or `error` reply carrying the
//! frame's `seq` verbatim when one was given. Every server frame has `"v": 1`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::geometry::Vec3;
use crate::localization::ActuatorLayout;
use crate::render::{Command, Engine, Snapshot, SourceSignal, SourceTelemetry};
use crate::signal::{Preset, SignalConfig};

pub const PROTOCOL_VERSION: u32 = 1;
pub const MAX_TELEMETRY_RATE: f64 = 120.0;
pub const MAX_ID_LEN: usize = 128;

fn unit_gain() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum ControlMessage {
    SetSource { id: String, pos: Vec3, gain: f64 },
    SetSignal { id: String, preset: Preset, carrier_hz: Option<f64> },
    RemoveSource { id: String },
    SubscribeTelemetry { rate_hz: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetSourceBody {
    id: String,
    pos: Vec3,
    #[serde(default = "unit_gain")]
    gain: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetSignalBody {
    id: String,
    preset: Preset,
    #[serde(default)]
    carrier_hz: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RemoveSourceBody {
    id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubscribeBody {
    rate_hz: f64,
}

fn body<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, (Option<String>, String)> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ((path != ".").then_some(path), e.inner().to_string())
    })
}

/// A parsed client frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Inbound {
    pub seq: Option<Value>,
    pub message: ControlMessage,
}

/// Why a frame was refused; becomes an `error` reply.
#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    pub seq: Option<Value>,
    pub message: String,
    pub field: Option<String>,
}

impl Rejection {
    fn new(seq: Option<Value>, field: Option<&str>, message: impl Into<String>) -> Self {
        Rejection {
            seq,
            message: message.into(),
            field: field.map(str::to_string),
        }
    }

    pub fn to_frame(&self) -> ServerFrame {
        ServerFrame::Error {
            v: PROTOCOL_VERSION,
            seq: self.seq.clone(),
            message: self.message.clone(),
            field: self.field.clone(),
        }
    }
}

/// Parses and validates one text frame.
pub fn parse_inbound(text: &str, sample_rate: u32) -> Result<Inbound, Rejection> {
    let mut value: Value = serde_json::from_str(text)
        .map_err(|e| Rejection::new(None, None, format!("malformed JSON: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Rejection::new(None, None, "message must be a JSON object"))?;
    let seq = obj.remove("seq");
    let kind = match obj.remove("type") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(Rejection::new(seq, Some("type"), "must be a string")),
        None => return Err(Rejection::new(seq, Some("type"), "missing message type")),
    };
    let parsed = match kind.as_str() {
        "set_source" => body::<SetSourceBody>(value).map(|b| ControlMessage::SetSource {
            id: b.id,
            pos: b.pos,
            gain: b.gain,
        }),
        "set_signal" => body::<SetSignalBody>(value).map(|b| ControlMessage::SetSignal {
            id: b.id,
            preset: b.preset,
            carrier_hz: b.carrier_hz,
        }),
        "remove_source" => body::<RemoveSourceBody>(value).map(|b| ControlMessage::RemoveSource { id: b.id }),
        "subscribe_telemetry" => body::<SubscribeBody>(value).map(|b| ControlMessage::SubscribeTelemetry { rate_hz: b.rate_hz }),
        other => return Err(Rejection::new(seq, Some("type"), format!("unknown message type {other:?}"))),
    };
    let message = parsed.map_err(|(field, msg)| Rejection {
        seq: seq.clone(),
        message: msg,
        field,
    })?;
    validate(&message, sample_rate).map_err(|(field, msg)| Rejection::new(seq.clone(), Some(field), msg))?;
    Ok(Inbound { seq, message })
}

fn validate(msg: &ControlMessage, sample_rate: u32) -> Result<(), (&'static str, String)> {
    let check_id = |id: &str| {
        if id.is_empty() || id.len() > MAX_ID_LEN {
            Err(("id", format!("must be 1 to {MAX_ID_LEN} bytes")))
        } else {
            Ok(())
        }
    };
    match msg {
        ControlMessage::SetSource { id, pos, gain } => {
            check_id(id)?;
            if !pos.is_finite() {
                return Err(("pos", "must be finite".into()));
            }
            if !gain.is_finite() || *gain < 0.0 {
                return Err(("gain", format!("must be finite and >= 0, got {gain}")));
            }
        }
        ControlMessage::SetSignal { id, carrier_hz, .. } => {
            check_id(id)?;
            if let Some(hz) = carrier_hz {
                let max = sample_rate as f64 / 4.0;
                if !(*hz >= 100.0 && *hz <= max) {
                    return Err(("carrier_hz", format!("must be within [100, {max}], got {hz}")));
                }
            }
        }
        ControlMessage::RemoveSource { id } => check_id(id)?,
        ControlMessage::SubscribeTelemetry { rate_hz } => {
            if !(*rate_hz > 0.0 && *rate_hz <= MAX_TELEMETRY_RATE) {
                return Err(("rate_hz", format!("must be within (0, {MAX_TELEMETRY_RATE}], got {rate_hz}")));
            }
        }
    }
    Ok(())
}

/// Engine command for a validated message; `None` for connection-level
/// messages such as telemetry subscriptions.
pub fn to_command(msg: &ControlMessage, signal_cfg: &SignalConfig, sample_rate: u32) -> Result<Option<Command>, String> {
    Ok(match msg {
        ControlMessage::SetSource { id, pos, gain } => Some(Command::SetSource {
            id: id.clone(),
            position: *pos,
            gain: *gain,
        }),
        ControlMessage::SetSignal { id, preset, carrier_hz } => {
            let cfg = SignalConfig {
                carrier_hz: carrier_hz.unwrap_or(signal_cfg.carrier_hz),
                ..*signal_cfg
            };
            let signal = SourceSignal::preset(*preset, &cfg, sample_rate).map_err(|e| e.to_string())?;
            Some(Command::SetSignal { id: id.clone(), signal })
        }
        ControlMessage::RemoveSource { id } => Some(Command::RemoveSource { id: id.clone() }),
        ControlMessage::SubscribeTelemetry { .. } => None,
    })
}

/// Applies one text frame directly to an engine and returns the reply.
///
/// This is the synchronous form of what the service does across its queue.
pub fn handle_message(text: &str, engine: &mut Engine) -> ServerFrame {
    let sample_rate = engine.render_config().sample_rate;
    let inbound = match parse_inbound(text, sample_rate) {
        Ok(i) => i,
        Err(r) => return r.to_frame(),
    };
    let seq = inbound.seq;
    let cmd = match to_command(&inbound.message, engine.signal_config(), sample_rate) {
        Ok(c) => c,
        Err(e) => return ServerFrame::error(seq, e, None),
    };
    if let Some(cmd) = cmd {
        if let Err(e) = engine.apply(cmd) {
            return ServerFrame::error(seq, e.to_string(), None);
        }
    }
    ServerFrame::ack(seq)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerFrame {
    Layout {
        v: u32,
        channels: usize,
        actuators: Vec<Vec3>,
        origin: Vec3,
    },
    Ack {
        v: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        seq: Option<Value>,
    },
    Error {
        v: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        seq: Option<Value>,
        message: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        field: Option<String>,
    },
    Telemetry {
        v: u32,
        t: f64,
        sources: Vec<SourceTelemetry>,
    },
}

impl ServerFrame {
    pub fn layout(layout: &ActuatorLayout) -> Self {
        ServerFrame::Layout {
            v: PROTOCOL_VERSION,
            channels: layout.len(),
            actuators: layout.actuators().to_vec(),
            origin: layout.perceived_origin(),
        }
    }

    pub fn ack(seq: Option<Value>) -> Self {
        ServerFrame::Ack {
            v: PROTOCOL_VERSION,
            seq,
        }
    }

    pub fn error(seq: Option<Value>, message: impl Into<String>, field: Option<String>) -> Self {
        ServerFrame::Error {
            v: PROTOCOL_VERSION,
            seq,
            message: message.into(),
            field,
        }
    }

    pub fn telemetry(snapshot: &Snapshot) -> Self {
        ServerFrame::Telemetry {
            v: PROTOCOL_VERSION,
            t: snapshot.t,
            sources: snapshot.sources.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server frames serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::PanningParams;
    use crate::render::RenderConfig;
    use serde_json::json;

    fn engine() -> Engine {
        let layout = ActuatorLayout::new(
            vec![Vec3::new(0.1, 0.0, 0.0), Vec3::new(-0.1, 0.0, 0.0), Vec3::new(0.0, 0.1, 0.0)],
            None,
        )
        .unwrap();
        Engine::new(layout, PanningParams::default(), SignalConfig::default(), RenderConfig::default()).unwrap()
    }

    fn reply(text: &str, e: &mut Engine) -> Value {
        serde_json::from_str(&handle_message(text, e).to_json()).unwrap()
    }

    #[test]
    fn set_source_adds_entry_and_acks() {
        let mut e = engine();
        let r = reply(r#"{"type":"set_source","id":"a","pos":[0.3,0,0],"gain":0.5,"seq":1}"#, &mut e);
        assert_eq!(r, json!({"type":"ack","v":1,"seq":1}));
        assert_eq!(e.source_count(), 1);
        assert_eq!(e.source("a").unwrap().gain, 0.5);
    }

    #[test]
    fn remove_unknown_is_noop_ack() {
        let mut e = engine();
        let r = reply(r#"{"type":"remove_source","id":"ghost","seq":"x"}"#, &mut e);
        assert_eq!(r, json!({"type":"ack","v":1,"seq":"x"}));
    }

    #[test]
    fn negative_gain_names_field() {
        let mut e = engine();
        let r = reply(r#"{"type":"set_source","id":"a","pos":[0,0,0],"gain":-1,"seq":4}"#, &mut e);
        assert_eq!(r["type"], "error");
        assert_eq!(r["field"], "gain");
        assert_eq!(r["seq"], 4);
        assert_eq!(e.source_count(), 0);
    }

    #[test]
    fn malformed_json_is_an_error_reply() {
        let mut e = engine();
        let r = reply("{not json", &mut e);
        assert_eq!(r["type"], "error");
        assert_eq!(r["v"], 1);
        assert!(r["message"].as_str().unwrap().contains("malformed JSON"));
    }

    #[test]
    fn type_errors_carry_seq_and_path() {
        let r = parse_inbound(r#"{"type":"set_source","id":"a","pos":[0,"x",0],"seq":9}"#, 48_000).unwrap_err();
        assert_eq!(r.seq, Some(json!(9)));
        assert!(r.field.unwrap().starts_with("pos"));
        let r = parse_inbound(r#"{"type":"set_source","id":"a","pos":[0,0,0],"gian":1}"#, 48_000).unwrap_err();
        assert!(r.message.contains("gian"));
        let r = parse_inbound(r#"{"type":"warp","seq":2}"#, 48_000).unwrap_err();
        assert_eq!(r.seq, Some(json!(2)));
        assert!(parse_inbound("[1,2]", 48_000).is_err());
    }

    #[test]
    fn gain_defaults_to_one() {
        let i = parse_inbound(r#"{"type":"set_source","id":"a","pos":[1,0,0]}"#, 48_000).unwrap();
        assert_eq!(
            i.message,
            ControlMessage::SetSource {
                id: "a".into(),
                pos: Vec3::new(1.0, 0.0, 0.0),
                gain: 1.0
            }
        );
        assert_eq!(i.seq, None);
    }

    #[test]
    fn subscription_rate_bounds() {
        assert!(parse_inbound(r#"{"type":"subscribe_telemetry","rate_hz":30}"#, 48_000).is_ok());
        assert!(parse_inbound(r#"{"type":"subscribe_telemetry","rate_hz":0}"#, 48_000).is_err());
        let r = parse_inbound(r#"{"type":"subscribe_telemetry","rate_hz":121}"#, 48_000).unwrap_err();
        assert_eq!(r.field.as_deref(), Some("rate_hz"));
    }

    #[test]
    fn set_signal_swaps_preset() {
        let mut e = engine();
        reply(r#"{"type":"set_source","id":"a","pos":[0.3,0,0]}"#, &mut e);
        let r = reply(r#"{"type":"set_signal","id":"a","preset":"footstep","carrier_hz":150,"seq":2}"#, &mut e);
        assert_eq!(r["type"], "ack");
        let r = reply(r#"{"type":"set_signal","id":"a","preset":"footstep","carrier_hz":50}"#, &mut e);
        assert_eq!(r["field"], "carrier_hz");
        let r = reply(r#"{"type":"set_signal","id":"a","preset":"roar"}"#, &mut e);
        assert_eq!(r["type"], "error");
    }

    #[test]
    fn layout_frame_shape() {
        let e = engine();
        let v: Value = serde_json::from_str(&ServerFrame::layout(e.layout()).to_json()).unwrap();
        assert_eq!(v["type"], "layout");
        assert_eq!(v["v"], 1);
        assert_eq!(v["channels"], 3);
        assert_eq!(v["actuators"][0], json!([0.1, 0.0, 0.0]));
    }

    #[test]
    fn telemetry_frame_weights_normalized() {
        let mut e = engine();
        reply(r#"{"type":"set_source","id":"a","pos":[0.3,0.2,0]}"#, &mut e);
        reply(r#"{"type":"set_source","id":"o","pos":[0,0.0333333333333,0]}"#, &mut e);
        let v: Value = serde_json::from_str(&ServerFrame::telemetry(&e.snapshot()).to_json()).unwrap();
        assert_eq!(v["type"], "telemetry");
        for s in v["sources"].as_array().unwrap() {
            let sum: f64 = s["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
            assert!((sum - 1.0).abs() < 1e-6);
        }
    }
}
