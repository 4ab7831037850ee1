//! Shared fixtures and a brute-force reference for the panning law.
//!
//! The reference works on plain coordinate triples and recomputes every
//! quantity from the actuator positions on each call.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vibropan::{ActuatorLayout, PanningParams, Vec3};

pub type P3 = [f64; 3];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(p: P3) -> Vec3 {
    Vec3::new(p[0], p[1], p[2])
}

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn len(a: P3) -> f64 {
    dot(a, a).sqrt()
}

pub fn centroid(acts: &[P3]) -> P3 {
    let n = acts.len() as f64;
    let mut c = [0.0; 3];
    for a in acts {
        for i in 0..3 {
            c[i] += a[i] / n;
        }
    }
    c
}

/// Direction cosines, or `None` when the source sits on the origin.
pub fn ref_cosines(acts: &[P3], origin: P3, p: P3) -> Option<Vec<f64>> {
    let s = sub(p, origin);
    if len(s) <= 1e-3 {
        return None;
    }
    Some(
        acts.iter()
            .map(|&a| {
                let q = sub(a, origin);
                (dot(q, s) / (len(q) * len(s))).clamp(-1.0, 1.0)
            })
            .collect(),
    )
}

pub fn ref_distribute(acts: &[P3], origin: P3, p: P3, prm: &PanningParams) -> Vec<f64> {
    let n = acts.len();
    let uniform = vec![1.0 / n as f64; n];
    let Some(u) = ref_cosines(acts, origin, p) else {
        return uniform;
    };
    let w: Vec<f64> = u.iter().map(|&u| ((1.0 + u) / 2.0).powf(prm.gamma)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return uniform;
    }
    let panned: Vec<f64> = w.iter().map(|w| w / total).collect();
    let rho = len(sub(p, origin));
    if prm.blend_radius > 0.0 && rho < prm.blend_radius {
        let t = rho / prm.blend_radius;
        return panned.iter().zip(&uniform).map(|(r, u)| (1.0 - t) * u + t * r).collect();
    }
    panned
}

pub fn ref_attenuation(rho: f64, prm: &PanningParams) -> f64 {
    if rho <= prm.rho0 {
        1.0
    } else {
        (prm.rho0 / rho).powf(prm.beta)
    }
}

/// `(position, gain, I0)` per source.
pub fn ref_channel_intensities(acts: &[P3], origin: P3, sources: &[(P3, f64, f64)], prm: &PanningParams) -> Vec<f64> {
    let mut total = vec![0.0; acts.len()];
    for &(p, gain, i0) in sources {
        let r = ref_distribute(acts, origin, p, prm);
        let d = ref_attenuation(len(sub(p, origin)), prm);
        for k in 0..acts.len() {
            total[k] += r[k] * d * gain * i0;
        }
    }
    total
}

pub fn random_point(rng: &mut impl Rng, half: f64) -> P3 {
    [rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half)]
}

/// Random 2..=12 actuator layout inside a 0.6 m cube, kept away from the centroid.
pub fn random_layout(rng: &mut impl Rng) -> (Vec<P3>, ActuatorLayout) {
    loop {
        let n = rng.gen_range(2..=12);
        let acts: Vec<P3> = (0..n).map(|_| random_point(rng, 0.3)).collect();
        let c = centroid(&acts);
        if acts.iter().any(|&a| len(sub(a, c)) < 0.01) {
            continue;
        }
        let layout = ActuatorLayout::new(acts.iter().map(|&a| v(a)).collect(), None).expect("valid layout");
        return (acts, layout);
    }
}

/// Source positions biased to cover the far field, the blend zone and the origin itself.
pub fn random_source(rng: &mut impl Rng, origin: P3) -> P3 {
    let scale = match rng.gen_range(0..10) {
        0 => return origin,
        1 | 2 => 0.06,
        3 | 4 => 0.3,
        _ => 2.0,
    };
    let d = random_point(rng, scale);
    [origin[0] + d[0], origin[1] + d[1], origin[2] + d[2]]
}

pub fn random_params(rng: &mut impl Rng) -> PanningParams {
    PanningParams {
        gamma: rng.gen_range(0.25..8.0),
        rho0: rng.gen_range(0.05..0.5),
        beta: rng.gen_range(0.0..3.0),
        blend_radius: if rng.gen_bool(0.5) { 0.05 } else { 0.0 },
    }
}

pub fn unit_square() -> Vec<P3> {
    vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]
}

pub fn jacket() -> ActuatorLayout {
    vibropan::io::load_layout_file(&vibropan::data_dir().join("jacket_layout.json")).expect("shipped layout")
}

pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// True when `b` is a rotation of `a`.
pub fn is_rotation<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|s| (0..a.len()).all(|i| a[(i + s) % a.len()] == b[i]))
}

/// Channel indices sorted by azimuth of their offset from the origin.
pub fn azimuth_order(layout: &ActuatorLayout) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..layout.len()).collect();
    let az: Vec<f64> = layout.offsets().iter().map(|q| Vec3::new(q.x, q.y, 0.0).azimuth()).collect();
    idx.sort_by(|&a, &b| az[a].total_cmp(&az[b]));
    idx
}

/// Channel indices sorted by a per-channel time.
pub fn time_order(times: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    idx
}

/// Smooth random intensity curve sampled at `hop`: an offset plus a few slow
/// sinusoids, staying within [0.1, 0.5].
pub fn smooth_envelope(rng: &mut impl Rng, frames: usize, hop: f64) -> Vec<f64> {
    let parts: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.0..0.2 / 3.0), rng.gen_range(0.2..4.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    (0..frames)
        .map(|m| {
            let t = m as f64 * hop;
            0.3 + parts
                .iter()
                .map(|(a, f, ph)| a * (std::f64::consts::TAU * f * t + ph).sin())
                .sum::<f64>()
        })
        .collect()
}

pub mod ws;
