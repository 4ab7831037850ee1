//! Spatial intensity distribution across an actuator array.
//!
//! A virtual source at position `p` is rendered by
//!
//! 1. attenuating its perceived intensity by distance from the perceived
//!    origin `O` (`I = d(p) * I0`),
//! 2. computing the direction cosine `u_k` between each actuator vector
//!    `q_k = position_k - O` and the source vector `p - O`,
//! 3. mapping cosines to nonnegative weights `w_k = ((1 + u_k) / 2)^gamma` and
//!    normalizing them to distribution ratios `r_k` that sum to one,
//! 4. assigning `I_k = r_k * I` to actuator `k`.
//!
//! Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Minimum distance (meters) between an actuator or source and the perceived
/// origin for a direction to be defined.
pub const EPS_GEOM: f64 = 1e-3;

/// Tolerance on the distribution-ratio sum.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Actuator positions plus the perceived origin they are referenced to.
///
/// Actuator order is channel order for everything downstream.
#[derive(Clone, Debug, PartialEq)]
pub struct ActuatorLayout {
    actuators: Vec<Vec3>,
    origin_override: Option<Vec3>,
    origin: Vec3,
    // q_k = actuator_k - O and |q_k|, cached
    offsets: Vec<Vec3>,
    offset_norms: Vec<f64>,
}

impl ActuatorLayout {
    pub fn new(actuators: Vec<Vec3>, origin_override: Option<Vec3>) -> Result<Self> {
        if actuators.is_empty() {
            return Err(Error::InvalidLayout("at least one actuator is required".into()));
        }
        if let Some(k) = actuators.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidLayout(format!(
                "actuator {k} has a non-finite coordinate"
            )));
        }
        if let Some(o) = origin_override {
            if !o.is_finite() {
                return Err(Error::InvalidLayout("origin has a non-finite coordinate".into()));
            }
        }
        let origin = origin_override.unwrap_or_else(|| centroid(&actuators));
        let offsets: Vec<Vec3> = actuators.iter().map(|&a| a - origin).collect();
        let offset_norms: Vec<f64> = offsets.iter().map(|q| q.norm()).collect();
        if let Some(k) = offset_norms.iter().position(|&n| n <= EPS_GEOM) {
            return Err(Error::InvalidLayout(format!(
                "actuator {k} is {:.6} m from the perceived origin (minimum {EPS_GEOM} m)",
                offset_norms[k]
            )));
        }
        Ok(ActuatorLayout {
            actuators,
            origin_override,
            origin,
            offsets,
            offset_norms,
        })
    }

    pub fn len(&self) -> usize {
        self.actuators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actuators.is_empty()
    }

    pub fn actuators(&self) -> &[Vec3] {
        &self.actuators
    }

    pub fn origin_override(&self) -> Option<Vec3> {
        self.origin_override
    }

    /// Actuator vectors `q_k` relative to the perceived origin.
    pub fn offsets(&self) -> &[Vec3] {
        &self.offsets
    }

    /// Perceived origin: the override if one was given, otherwise the
    /// centroid of the actuator positions.
    pub fn perceived_origin(&self) -> Vec3 {
        self.origin
    }

    /// Direction cosine of every actuator vector with the source vector `p - O`.
    pub fn direction_cosines(&self, p: Vec3) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.len()];
        self.direction_cosines_into(p, &mut u)?;
        Ok(u)
    }

    pub fn direction_cosines_into(&self, p: Vec3, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), self.len(), "output length must match actuator count");
        let rel = p - self.origin;
        let dist = rel.norm();
        if dist.is_nan() || dist <= EPS_GEOM {
            return Err(Error::DegenerateSource { distance: dist });
        }
        for ((u, q), qn) in out.iter_mut().zip(&self.offsets).zip(&self.offset_norms) {
            *u = (q.dot(rel) / (qn * dist)).clamp(-1.0, 1.0);
        }
        Ok(())
    }

    /// Distribution ratios for a source at `p`.
    pub fn distribute(&self, p: Vec3, params: &PanningParams) -> DistributionWeights {
        let mut r = vec![0.0; self.len()];
        self.distribute_into(p, params, &mut r);
        DistributionWeights { r }
    }

    /// Allocation-free form of [`distribute`](Self::distribute); `out` must have
    /// one slot per actuator.
    pub fn distribute_into(&self, p: Vec3, params: &PanningParams, out: &mut [f64]) {
        let n = self.len();
        let uniform = 1.0 / n as f64;
        let dist = p.distance(self.origin);
        if dist.is_nan() || dist <= EPS_GEOM {
            out.fill(uniform);
            return;
        }
        self.direction_cosines_into(p, out)
            .expect("distance checked above");
        let mut sum = 0.0;
        for v in out.iter_mut() {
            *v = panning_weight(*v, params.gamma);
            sum += *v;
        }
        if !sum.is_finite() || sum <= 0.0 {
            out.fill(uniform);
            return;
        }
        for v in out.iter_mut() {
            *v /= sum;
        }
        if params.blend_radius > 0.0 && dist < params.blend_radius {
            let t = dist / params.blend_radius;
            for v in out.iter_mut() {
                *v = (1.0 - t) * uniform + t * *v;
            }
        }
    }

    /// Per-source distribution, attenuation and channel intensities.
    pub fn contribution(
        &self,
        position: Vec3,
        gain: f64,
        intensity: f64,
        params: &PanningParams,
    ) -> SourceContribution {
        let weights = self.distribute(position, params);
        let attenuation = attenuation(position, self.origin, params);
        let scale = attenuation * gain * intensity;
        let intensities = weights.r.iter().map(|r| r * scale).collect();
        SourceContribution {
            weights,
            attenuation,
            intensities,
        }
    }

    /// Sums each source's `r_k * d * gain * I0` per channel.
    pub fn channel_intensities(
        &self,
        sources: &[(VirtualSource, f64)],
        params: &PanningParams,
    ) -> Vec<f64> {
        let mut total = vec![0.0; self.len()];
        let mut r = vec![0.0; self.len()];
        for (source, i0) in sources {
            self.accumulate_intensities(source.position, source.gain, *i0, params, &mut r, &mut total);
        }
        total
    }

    /// Adds one source's channel intensities into `total`, using `scratch` for
    /// the distribution ratios.
    pub fn accumulate_intensities(
        &self,
        position: Vec3,
        gain: f64,
        intensity: f64,
        params: &PanningParams,
        scratch: &mut [f64],
        total: &mut [f64],
    ) {
        self.distribute_into(position, params, scratch);
        let scale = attenuation(position, self.origin, params) * gain * intensity;
        for (t, r) in total.iter_mut().zip(scratch.iter()) {
            *t += r * scale;
        }
    }
}

fn centroid(points: &[Vec3]) -> Vec3 {
    let sum = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p);
    sum / points.len() as f64
}

/// Cosine-power panning law `((1 + u) / 2)^gamma`, strictly increasing in `u` for `gamma > 0`.
pub fn panning_weight(u: f64, gamma: f64) -> f64 {
    (0.5 * (1.0 + u)).powf(gamma)
}

/// Clamped inverse-power distance law `(rho0 / max(|p - O|, rho0))^beta`.
///
/// Equal to one inside the near-field radius and monotone nonincreasing
/// outside it.
pub fn attenuation(p: Vec3, origin: Vec3, params: &PanningParams) -> f64 {
    let ratio = p.distance(origin).max(params.rho0) / params.rho0;
    ratio.powf(-params.beta)
}

/// A point source with a gain on its perceived intensity.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualSource {
    pub id: String,
    pub position: Vec3,
    pub gain: f64,
}

impl VirtualSource {
    pub fn new(id: impl Into<String>, position: Vec3, gain: f64) -> Result<Self> {
        if !position.is_finite() {
            return Err(Error::param("pos", "must be finite"));
        }
        if !gain.is_finite() || gain < 0.0 {
            return Err(Error::param("gain", format!("must be finite and >= 0, got {gain}")));
        }
        Ok(VirtualSource {
            id: id.into(),
            position,
            gain,
        })
    }
}

/// Nonnegative per-actuator ratios summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionWeights {
    pub r: Vec<f64>,
}

impl DistributionWeights {
    pub fn sum(&self) -> f64 {
        self.r.iter().sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.r.iter().all(|&r| r >= 0.0) && (self.sum() - 1.0).abs() <= tol
    }

    /// Index of the largest ratio; the first one wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.r)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceContribution {
    pub weights: DistributionWeights,
    pub attenuation: f64,
    pub intensities: Vec<f64>,
}

/// Free parameters of the panning and attenuation laws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanningParams {
    /// Direction sharpness exponent.
    pub gamma: f64,
    /// Near-field radius in meters; no attenuation inside it.
    pub rho0: f64,
    /// Attenuation exponent.
    pub beta: f64,
    /// Radius around the origin where weights blend linearly toward uniform.
    pub blend_radius: f64,
}

impl Default for PanningParams {
    fn default() -> Self {
        PanningParams {
            gamma: 2.0,
            rho0: 0.2,
            beta: 1.0,
            blend_radius: 0.05,
        }
    }
}

impl PanningParams {
    /// Checks invariants; errors name the offending field relative to `prefix`.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| {
            if prefix.is_empty() {
                name.to_string()
            } else {
                format!("{prefix}.{name}")
            }
        };
        let nonneg = [("gamma", self.gamma), ("beta", self.beta), ("blend_radius", self.blend_radius)];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(field(name), format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.rho0.is_finite() || self.rho0 <= 0.0 {
            return Err(Error::param(field("rho0"), format!("must be finite and > 0, got {}", self.rho0)));
        }
        Ok(())
    }
}
