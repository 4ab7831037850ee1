//! Trajectory keyframes as `t,x,y,z,gain` rows.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::render::{Keyframe, Trajectory};

const HEADER: &str = "t,x,y,z,gain";

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((line, other)) => {
            return Err(Error::Csv {
                line,
                message: format!("expected header {HEADER:?}, found {other:?}"),
            })
        }
        None => {
            return Err(Error::Csv {
                line: 1,
                message: "empty file".into(),
            })
        }
    }

    let mut keyframes: Vec<Keyframe> = Vec::new();
    for (line, row) in lines {
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Csv {
                line,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let mut v = [0.0f64; 5];
        for (slot, (name, field)) in v.iter_mut().zip(["t", "x", "y", "z", "gain"].iter().zip(&fields)) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Csv {
                    line,
                    message: format!("field {name} is not a finite number: {field:?}"),
                })?;
        }
        let [t, x, y, z, gain] = v;
        if gain < 0.0 {
            return Err(Error::Csv {
                line,
                message: format!("gain must be >= 0, got {gain}"),
            });
        }
        if let Some(prev) = keyframes.last() {
            if t <= prev.t {
                return Err(Error::Csv {
                    line,
                    message: format!("t must be strictly increasing ({t} after {})", prev.t),
                });
            }
        }
        keyframes.push(Keyframe {
            t,
            position: Vec3::new(x, y, z),
            gain,
        });
    }
    Trajectory::new(keyframes)
}

/// Serializes keyframes with shortest round-trip float formatting.
pub fn write_trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for k in traj.keyframes() {
        let p = k.position;
        writeln!(out, "{},{},{},{},{}", k.t, p.x, p.y, p.z, k.gain).unwrap();
    }
    out
}
