use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::PanningParams;
use crate::render::RenderConfig;
use crate::signal::SignalConfig;

/// Optional tuning document. Every section and field may be omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigDocument {
    pub panning: PanningParams,
    pub signal: SignalConfig,
    pub render: RenderConfig,
    /// Layout file, relative paths resolved by the caller.
    pub layout: Option<String>,
}

impl ConfigDocument {
    pub fn validate(&self) -> Result<()> {
        self.panning.validate("panning")?;
        self.render.validate("render")?;
        self.signal.validate("signal", self.render.sample_rate)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn load_config(text: &str) -> Result<ConfigDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    doc.validate().map_err(|e| match e {
        Error::InvalidParameter { field, reason } => Error::Config {
            path: field,
            message: reason,
        },
        other => other,
    })?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_defaults() {
        let doc = load_config("{}").unwrap();
        assert_eq!(doc.panning.gamma, 2.0);
        assert_eq!(doc.panning.rho0, 0.2);
        assert_eq!(doc.panning.beta, 1.0);
        assert_eq!(doc.signal.carrier_hz, 200.0);
        assert_eq!(doc.render.sample_rate, 48_000);
        assert_eq!(doc.layout, None);
    }

    #[test]
    fn invariant_violation_names_path() {
        match load_config(r#"{"panning":{"gamma":-1}}"#).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "panning.gamma"),
            other => panic!("{other:?}"),
        }
        match load_config(r#"{"render":{"block":8}}"#).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "render.block"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn carrier_checked_against_render_rate() {
        let err = load_config(r#"{"signal":{"carrier_hz":3000},"render":{"sample_rate":8000}}"#).unwrap_err();
        assert!(err.to_string().contains("signal.carrier_hz"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = load_config(r#"{"panning":{"gama":1}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gama"), "{msg}");
        assert!(msg.contains("panning"), "{msg}");
    }

    #[test]
    fn syntax_error() {
        assert!(matches!(load_config("{"), Err(Error::Config { .. })));
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"{
            "panning": {"gamma": 3.5, "rho0": 0.25, "beta": 2.0, "blend_radius": 0.1},
            "signal": {"carrier_hz": 180, "window": 0.02, "hop": 0.01, "sens_center_hz": 240, "sens_q": 0.9},
            "render": {"sample_rate": 44100, "block": 128, "slew": 0.02},
            "layout": "jacket_layout.json"
        }"#;
        let doc = load_config(text).unwrap();
        assert_eq!(load_config(&doc.to_json()).unwrap(), doc);
        assert_eq!(doc.render.block, 128);
    }
}
