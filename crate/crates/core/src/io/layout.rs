use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::localization::ActuatorLayout;

/// On-disk form: `{"actuators": [[x,y,z], ...], "origin": [x,y,z] | null}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDocument {
    pub actuators: Vec<Vec3>,
    #[serde(default)]
    pub origin: Option<Vec3>,
}

impl From<&ActuatorLayout> for LayoutDocument {
    fn from(layout: &ActuatorLayout) -> Self {
        LayoutDocument {
            actuators: layout.actuators().to_vec(),
            origin: layout.origin_override(),
        }
    }
}

pub fn parse_layout(text: &str) -> Result<ActuatorLayout> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: LayoutDocument = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    ActuatorLayout::new(doc.actuators, doc.origin)
}

pub fn layout_to_json(layout: &ActuatorLayout) -> String {
    serde_json::to_string_pretty(&LayoutDocument::from(layout)).expect("layout serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_null_origin() {
        let l = parse_layout(r#"{"actuators": [[1,0,0],[-1,0,0]], "origin": null}"#).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.perceived_origin(), Vec3::ZERO);
    }

    #[test]
    fn round_trips() {
        let l = parse_layout(r#"{"actuators": [[1,0,0],[0,2,0]], "origin": [0,0,0.5]}"#).unwrap();
        assert_eq!(parse_layout(&layout_to_json(&l)).unwrap(), l);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse_layout(r#"{"actuators": []}"#).is_err());
        assert!(parse_layout(r#"{"actuators": [[1,0]]}"#).is_err());
        let err = parse_layout(r#"{"actuators": [[1,0,0]], "orign": [0,0,0]}"#).unwrap_err();
        assert!(err.to_string().contains("orign"));
    }
}
