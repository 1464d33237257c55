//! Delivery event detection: foot plant, maximum external rotation, ball
//! release.

use serde::{Deserialize, Serialize};

use crate::geom::{angle_between, Vec3};
use crate::handedness::Roles;
use crate::pose::{JointId, PoseSequence};

use super::registry::Event;
use super::MetricsError;

/// Lead ankle must be within this height of its minimum at foot plant (ft).
pub const FOOT_PLANT_HEIGHT_TOL: f64 = 0.05;
/// Lead ankle speed ceiling at foot plant (ft/s).
pub const FOOT_PLANT_MAX_SPEED: f64 = 2.0;
/// Peak wrist speeds below this (ft/s) mark ball release as unreliable.
pub const MIN_RELEASE_SPEED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryEvents {
    pub foot_plant: usize,
    pub mer: usize,
    pub ball_release: usize,
    #[serde(default)]
    pub confidence_flags: Vec<String>,
}

impl DeliveryEvents {
    pub fn frame(&self, e: Event) -> usize {
        match e {
            Event::FootPlant => self.foot_plant,
            Event::Mer => self.mer,
            Event::BallRelease => self.ball_release,
        }
    }
}

/// Per-frame speed of a trajectory in units per second.
pub fn speeds(track: &[Vec3], fps: f64) -> Vec<f64> {
    let n = track.len();
    (0..n)
        .map(|t| {
            let d = match t {
                0 => track[1] - track[0],
                t if t == n - 1 => track[t] - track[t - 1],
                t => (track[t + 1] - track[t - 1]) * 0.5,
            };
            d.norm() * fps
        })
        .collect()
}

/// Unit vector the torso faces: shoulder line × trunk axis.
pub fn trunk_forward(seq: &PoseSequence, t: usize) -> Option<Vec3> {
    use JointId::*;
    let f = seq.frame(t);
    let lateral = f.pos(LShoulder) - f.pos(RShoulder);
    let up = f.pos(LShoulder).midpoint(f.pos(RShoulder)) - f.pos(LHip).midpoint(f.pos(RHip));
    lateral.cross(up).try_normalize().ok()
}

/// Angle between the throwing forearm and the trunk's forward direction.
pub fn external_rotation_proxy(seq: &PoseSequence, roles: &Roles, t: usize) -> Option<f64> {
    let f = seq.frame(t);
    let fwd = trunk_forward(seq, t)?;
    angle_between(f.pos(roles.throw_arm.end) - f.pos(roles.throw_arm.mid), fwd).ok()
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    values.fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
        Some((_, b)) if b >= v => best,
        _ if v.is_nan() => best,
        _ => Some((i, v)),
    })
    .map(|(i, _)| i)
}

pub fn detect_events(seq: &PoseSequence, roles: &Roles) -> Result<DeliveryEvents, MetricsError> {
    let n = seq.len();
    if n < 3 {
        return Err(MetricsError::TooShort { len: n, need: 3 });
    }
    let fps = seq.fps();
    let mut flags = Vec::new();

    let ankle = seq.track(roles.lead_leg.end);
    let ankle_speed = speeds(&ankle, fps);
    let min_z = ankle.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let foot_plant = match (0..n).find(|&t| ankle[t].z - min_z <= FOOT_PLANT_HEIGHT_TOL && ankle_speed[t] < FOOT_PLANT_MAX_SPEED) {
        Some(t) => t,
        None => {
            flags.push("foot_plant_fallback".to_string());
            (0..n).min_by(|&a, &b| ankle[a].z.total_cmp(&ankle[b].z)).expect("n >= 3")
        }
    };

    let wrist_speed = speeds(&seq.track(roles.throw_arm.end), fps);
    let ball_release = argmax(wrist_speed.iter().copied().enumerate()).unwrap_or(n - 1);
    if wrist_speed[ball_release] < MIN_RELEASE_SPEED {
        flags.push("low_wrist_speed".to_string());
    }
    if ball_release <= foot_plant {
        return Err(MetricsError::EventOrderViolation { foot_plant, mer: None, ball_release });
    }

    let mer = argmax((foot_plant + 1..=ball_release).filter_map(|t| external_rotation_proxy(seq, roles, t).map(|v| (t, v))))
        .ok_or(MetricsError::EventOrderViolation { foot_plant, mer: None, ball_release })?;
    Ok(DeliveryEvents { foot_plant, mer, ball_release, confidence_flags: flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handedness::{assign_roles, Handedness};
    use crate::pose::{Space, NUM_JOINTS};

    /// Lead ankle lands at frame 40 (slow enough from 41); wrist speed peaks at 70.
    fn toy(n: usize) -> PoseSequence {
        use JointId::*;
        let frames: Vec<[Vec3; NUM_JOINTS]> = (0..n)
            .map(|t| {
                let tf = t as f64;
                let mut p = [Vec3::new(0.0, 0.0, 3.0); NUM_JOINTS];
                p[LShoulder.index()] = Vec3::new(0.0, 0.6, 4.5);
                p[RShoulder.index()] = Vec3::new(0.0, -0.6, 4.5);
                p[LHip.index()] = Vec3::new(0.0, 0.3, 3.0);
                p[RHip.index()] = Vec3::new(0.0, -0.3, 3.0);
                let h = if t < 40 { 0.02 * (40.0 - tf) } else { 0.0 };
                p[LAnkle.index()] = Vec3::new(2.0, 0.3, h);
                // forearm sweeps from pointing back to pointing forward
                let ang = std::f64::consts::PI * (1.0 / (1.0 + (-(tf - 70.0) / 4.0).exp()));
                p[RElbow.index()] = Vec3::new(0.0, -0.9, 4.5);
                p[RWrist.index()] = p[RElbow.index()] + Vec3::new(-ang.cos(), 0.0, ang.sin()) * 0.85;
                p
            })
            .collect();
        PoseSequence::from_positions(&frames, 240.0, Space::Global).unwrap()
    }

    #[test]
    fn events_are_ordered_and_located() {
        let seq = toy(100);
        let ev = detect_events(&seq, &assign_roles(Handedness::Right)).unwrap();
        assert_eq!(ev.foot_plant, 41);
        assert_eq!(ev.ball_release, 70);
        assert!(ev.foot_plant < ev.mer && ev.mer <= ev.ball_release);
        assert!(ev.confidence_flags.is_empty());
    }

    #[test]
    fn stationary_wrist_is_flagged_or_rejected() {
        use JointId::*;
        let mut p = [Vec3::new(0.0, 0.0, 3.0); NUM_JOINTS];
        p[LShoulder.index()] = Vec3::new(0.0, 0.6, 4.5);
        p[RShoulder.index()] = Vec3::new(0.0, -0.6, 4.5);
        p[LHip.index()] = Vec3::new(0.0, 0.3, 3.0);
        p[RHip.index()] = Vec3::new(0.0, -0.3, 3.0);
        let mut frames = vec![p; 30];
        for (t, f) in frames.iter_mut().enumerate() {
            f[RWrist.index()] = Vec3::new(0.0, -0.6, 3.0 + 1e-4 * ((t as f64) - 20.0).powi(2) * -1.0);
        }
        let seq = PoseSequence::from_positions(&frames, 240.0, Space::Global).unwrap();
        match detect_events(&seq, &assign_roles(Handedness::Right)) {
            Ok(ev) => {
                assert!(ev.confidence_flags.contains(&"low_wrist_speed".to_string()));
                assert!(ev.foot_plant < ev.mer && ev.mer <= ev.ball_release);
            }
            Err(e) => assert!(matches!(e, MetricsError::EventOrderViolation { .. })),
        }
    }
}
