//! Per-frame joint-angle and position metrics.

use serde::{Deserialize, Serialize};

use crate::geom::{
    angle_between, normalize_degrees, project_to_plane, signed_horizontal_angle, tilt_from_vertical, GeomError, Plane,
    Vec3,
};
use crate::handedness::{Limb, Roles};
use crate::pose::{Frame, JointId, PoseSequence};

use super::registry::{MetricName, Unit};

use JointId::*;

/// Flexion of the chain a–b–c: 0° when straight.
pub fn flexion(a: Vec3, b: Vec3, c: Vec3) -> Result<f64, GeomError> {
    Ok(180.0 - angle_between(a - b, c - b)?)
}

/// Shin inclination from vertical in the frontal (X) and sagittal (Y)
/// planes. `lateral_sign` flips the frontal angle so that positive points
/// toward the glove side.
pub fn shin_angles(knee: Vec3, ankle: Vec3, lateral_sign: f64) -> Result<(f64, f64), GeomError> {
    let s = knee - ankle;
    let x = tilt_from_vertical(project_to_plane(Vec3::new(s.x, lateral_sign * s.y, s.z), Plane::FrontalYz))?;
    let y = tilt_from_vertical(project_to_plane(s, Plane::SagittalXz))?;
    Ok((x, y))
}

/// Rotation of a left-minus-right segment line from square-to-home.
pub fn line_rotation(left: Vec3, right: Vec3, lateral_sign: f64) -> Result<f64, GeomError> {
    let phi = signed_horizontal_angle(left - right)?;
    Ok(lateral_sign * normalize_degrees(phi - 90.0))
}

/// Forward and lateral tilt of the mid-hip → mid-shoulder vector.
pub fn trunk_tilt(mid_hip: Vec3, mid_shoulder: Vec3, lateral_sign: f64) -> Result<(f64, f64), GeomError> {
    let t = mid_shoulder - mid_hip;
    let fwd = tilt_from_vertical(project_to_plane(t, Plane::SagittalXz))?;
    let lat = tilt_from_vertical(project_to_plane(Vec3::new(t.x, lateral_sign * t.y, t.z), Plane::FrontalYz))?;
    Ok((fwd, lat))
}

/// Upper-arm angle from hanging straight down.
pub fn shoulder_abduction(shoulder: Vec3, elbow: Vec3) -> Result<f64, GeomError> {
    angle_between(elbow - shoulder, -Vec3::unit_z())
}

/// Origin for the center-of-gravity proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CogAnchor {
    /// Ground projection of the first frame's pelvis.
    #[default]
    FirstPelvis,
    /// World origin.
    World,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CogConfig {
    pub pelvis_weight: f64,
    pub shoulder_weight: f64,
    pub anchor: CogAnchor,
}

impl Default for CogConfig {
    fn default() -> Self {
        Self { pelvis_weight: 0.6, shoulder_weight: 0.4, anchor: CogAnchor::FirstPelvis }
    }
}

pub fn cog_anchor(seq: &PoseSequence, cfg: &CogConfig) -> Vec3 {
    match cfg.anchor {
        CogAnchor::World => Vec3::zero(),
        CogAnchor::FirstPelvis => {
            let p = seq.frame(0).pos(Pelvis);
            Vec3::new(p.x, p.y, 0.0)
        }
    }
}

/// Weighted pelvis/mid-shoulder point relative to `anchor`, with y
/// multiplied by `lateral_sign`.
pub fn center_of_gravity(f: &Frame, anchor: Vec3, cfg: &CogConfig, lateral_sign: f64) -> Vec3 {
    let mid_sh = f.pos(LShoulder).midpoint(f.pos(RShoulder));
    let c = f.pos(Pelvis) * cfg.pelvis_weight + mid_sh * cfg.shoulder_weight - anchor;
    Vec3::new(c.x, lateral_sign * c.y, c.z)
}

/// Per-frame values of one metric; degenerate frames carry the previous
/// valid value and are listed in `flagged`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub name: String,
    pub unit: Unit,
    pub values: Vec<f64>,
    pub flagged: Vec<usize>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Builds a series from fallible per-frame values. Leading failures take
/// the first valid value; an all-degenerate series stays NaN.
pub fn carry_forward(name: &str, unit: Unit, raw: Vec<Option<f64>>) -> MetricSeries {
    let first = raw.iter().flatten().next().copied().unwrap_or(f64::NAN);
    let mut last = first;
    let mut flagged = Vec::new();
    let values = raw
        .into_iter()
        .enumerate()
        .map(|(t, v)| match v {
            Some(v) => {
                last = v;
                v
            }
            None => {
                flagged.push(t);
                last
            }
        })
        .collect();
    MetricSeries { name: name.to_string(), unit, values, flagged }
}

/// All 18 per-frame values for one frame, in registry order. `None` marks a
/// degenerate configuration.
pub fn frame_metrics(f: &Frame, roles: &Roles, anchor: Vec3, cog: &CogConfig) -> [Option<f64>; 18] {
    let s = roles.side.sign();
    let g = |j: JointId| f.pos(j);
    let limb_flex = |l: Limb| flexion(g(l.root), g(l.mid), g(l.end)).ok();
    let shin = |l: Limb| shin_angles(g(l.mid), g(l.end), s).ok();
    let lead_shin = shin(roles.lead_leg);
    let trail_shin = shin(roles.trail_leg);
    let pelvis = line_rotation(g(LHip), g(RHip), s).ok();
    let torso = line_rotation(g(LShoulder), g(RShoulder), s).ok();
    let sep = pelvis.zip(torso).map(|(p, t)| normalize_degrees(t - p));
    let mid_hip = g(LHip).midpoint(g(RHip));
    let mid_sh = g(LShoulder).midpoint(g(RShoulder));
    let tilt = trunk_tilt(mid_hip, mid_sh, s).ok();
    let c = center_of_gravity(f, anchor, cog, s);
    let mut out = [None; 18];
    for m in MetricName::ALL {
        out[m.index()] = match m {
            MetricName::KneeFlexionLead => limb_flex(roles.lead_leg),
            MetricName::KneeFlexionTrail => limb_flex(roles.trail_leg),
            MetricName::ShinAngleXLead => lead_shin.map(|v| v.0),
            MetricName::ShinAngleYLead => lead_shin.map(|v| v.1),
            MetricName::ShinAngleXTrail => trail_shin.map(|v| v.0),
            MetricName::ShinAngleYTrail => trail_shin.map(|v| v.1),
            MetricName::ElbowFlexionThrow => limb_flex(roles.throw_arm),
            MetricName::ElbowFlexionGlove => limb_flex(roles.glove_arm),
            MetricName::ShoulderAbductionThrow => shoulder_abduction(g(roles.throw_arm.root), g(roles.throw_arm.mid)).ok(),
            MetricName::ShoulderAbductionGlove => shoulder_abduction(g(roles.glove_arm.root), g(roles.glove_arm.mid)).ok(),
            MetricName::PelvisRotation => pelvis,
            MetricName::TorsoRotation => torso,
            MetricName::HipShoulderSeparation => sep,
            MetricName::TrunkForwardTilt => tilt.map(|v| v.0),
            MetricName::TrunkLateralTilt => tilt.map(|v| v.1),
            MetricName::CogX => Some(c.x),
            MetricName::CogY => Some(c.y),
            MetricName::CogZ => Some(c.z),
        };
    }
    out
}

/// The 18 series in registry order.
pub fn metric_series(seq: &PoseSequence, roles: &Roles, cog: &CogConfig) -> Vec<MetricSeries> {
    let anchor = cog_anchor(seq, cog);
    let per_frame: Vec<[Option<f64>; 18]> = seq.frames().iter().map(|f| frame_metrics(f, roles, anchor, cog)).collect();
    MetricName::ALL
        .iter()
        .map(|m| carry_forward(m.name(), m.unit(), per_frame.iter().map(|v| v[m.index()]).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handedness::{assign_roles, Handedness};
    use crate::pose::{Space, NUM_JOINTS};

    const EPS: f64 = 1e-9;

    #[test]
    fn flexion_examples() {
        let hip = Vec3::new(0.0, 0.0, 3.0);
        let knee = Vec3::new(0.0, 0.0, 1.5);
        assert!(flexion(hip, knee, Vec3::zero()).unwrap().abs() < EPS);
        assert!((flexion(hip, knee, Vec3::new(1.5, 0.0, 1.5)).unwrap() - 90.0).abs() < EPS);
        let a = 45f64.to_radians();
        let ankle = knee + Vec3::new(-a.sin(), 0.0, -a.cos()) * 1.5;
        assert!((flexion(hip, knee, ankle).unwrap() - 45.0).abs() < EPS);
        assert!(flexion(knee, knee, ankle).is_err());
    }

    #[test]
    fn shin_examples() {
        let ankle = Vec3::zero();
        let (x, y) = shin_angles(Vec3::new(0.0, 0.0, 1.5), ankle, 1.0).unwrap();
        assert!(x.abs() < EPS && y.abs() < EPS);
        let r = 10f64.to_radians();
        let (x, y) = shin_angles(Vec3::new(r.sin(), 0.0, r.cos()), ankle, 1.0).unwrap();
        assert!(x.abs() < EPS && (y - 10.0).abs() < EPS);
        let r = 15f64.to_radians();
        let (x, y) = shin_angles(Vec3::new(0.0, r.sin(), r.cos()), ankle, 1.0).unwrap();
        assert!((x - 15.0).abs() < EPS && y.abs() < EPS);
        let (x, _) = shin_angles(Vec3::new(0.0, r.sin(), r.cos()), ankle, -1.0).unwrap();
        assert!((x + 15.0).abs() < EPS);
        assert!(shin_angles(Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn abduction_examples() {
        let sh = Vec3::new(0.0, -0.6, 4.8);
        assert!(shoulder_abduction(sh, sh - Vec3::unit_z()).unwrap().abs() < EPS);
        assert!((shoulder_abduction(sh, sh - Vec3::unit_y()).unwrap() - 90.0).abs() < EPS);
        let a = 95f64.to_radians();
        let el = sh + Vec3::new(0.0, -a.sin(), -a.cos()) * 0.95;
        assert!((shoulder_abduction(sh, el).unwrap() - 95.0).abs() < EPS);
    }

    /// Upright body facing +x: rotations 0, tilts 0.
    fn square_frame() -> Frame {
        let mut p = [Vec3::zero(); NUM_JOINTS];
        p[Pelvis.index()] = Vec3::new(0.0, 0.0, 3.0);
        p[LHip.index()] = Vec3::new(0.0, 0.3, 3.0);
        p[RHip.index()] = Vec3::new(0.0, -0.3, 3.0);
        p[Neck.index()] = Vec3::new(0.0, 0.0, 4.7);
        p[LShoulder.index()] = Vec3::new(0.0, 0.6, 4.5);
        p[RShoulder.index()] = Vec3::new(0.0, -0.6, 4.5);
        p[LKnee.index()] = Vec3::new(0.0, 0.3, 1.5);
        p[RKnee.index()] = Vec3::new(0.0, -0.3, 1.5);
        p[LAnkle.index()] = Vec3::new(0.0, 0.3, 0.0);
        p[RAnkle.index()] = Vec3::new(0.0, -0.3, 0.0);
        p[LElbow.index()] = Vec3::new(0.0, 0.6, 3.5);
        p[RElbow.index()] = Vec3::new(0.0, -0.6, 3.5);
        p[LWrist.index()] = Vec3::new(0.0, 0.6, 2.6);
        p[RWrist.index()] = Vec3::new(0.0, -0.6, 2.6);
        p[Nose.index()] = Vec3::new(0.3, 0.0, 5.1);
        p[LEye.index()] = Vec3::new(0.25, 0.1, 5.2);
        p[REye.index()] = Vec3::new(0.25, -0.1, 5.2);
        Frame::from_positions(0, &p)
    }

    #[test]
    fn square_pose_is_zero() {
        let roles = assign_roles(Handedness::Right);
        let v = frame_metrics(&square_frame(), &roles, Vec3::zero(), &CogConfig::default());
        for m in [
            MetricName::PelvisRotation,
            MetricName::TorsoRotation,
            MetricName::HipShoulderSeparation,
            MetricName::TrunkForwardTilt,
            MetricName::TrunkLateralTilt,
            MetricName::KneeFlexionLead,
            MetricName::ElbowFlexionThrow,
            MetricName::ShoulderAbductionThrow,
        ] {
            assert!(v[m.index()].unwrap().abs() < EPS, "{m}");
        }
    }

    #[test]
    fn separation_and_tilt_constructions() {
        let roles = assign_roles(Handedness::Right);
        let f = square_frame();
        let mut p = f.positions();
        let neck = p[Neck.index()];
        for j in [LShoulder, RShoulder] {
            p[j.index()] = neck + (p[j.index()] - neck).rotate_z(50.0);
        }
        let v = frame_metrics(&Frame::from_positions(0, &p), &roles, Vec3::zero(), &CogConfig::default());
        assert!((v[MetricName::HipShoulderSeparation.index()].unwrap() - 50.0).abs() < EPS);
        assert!((v[MetricName::TorsoRotation.index()].unwrap() - 50.0).abs() < EPS);

        // tilt the upper body 35° toward home about the mid-hip
        let mut p = f.positions();
        let c = p[Pelvis.index()];
        let r = 35f64.to_radians();
        for j in [Neck, LShoulder, RShoulder] {
            let d = p[j.index()] - c;
            p[j.index()] = c + Vec3::new(d.x * r.cos() + d.z * r.sin(), d.y, -d.x * r.sin() + d.z * r.cos());
        }
        let v = frame_metrics(&Frame::from_positions(0, &p), &roles, Vec3::zero(), &CogConfig::default());
        assert!((v[MetricName::TrunkForwardTilt.index()].unwrap() - 35.0).abs() < EPS);
        assert!(v[MetricName::TrunkLateralTilt.index()].unwrap().abs() < EPS);
    }

    #[test]
    fn cog_examples() {
        let mut p = [Vec3::new(0.0, 0.0, 3.0); NUM_JOINTS];
        p[LShoulder.index()] = Vec3::new(0.0, 0.5, 4.5);
        p[RShoulder.index()] = Vec3::new(0.0, -0.5, 4.5);
        let f = Frame::from_positions(0, &p);
        let c = center_of_gravity(&f, Vec3::zero(), &CogConfig::default(), 1.0);
        assert!((c - Vec3::new(0.0, 0.0, 3.6)).norm() < EPS);
        let pel = CogConfig { pelvis_weight: 1.0, shoulder_weight: 0.0, ..Default::default() };
        assert!((center_of_gravity(&f, Vec3::zero(), &pel, 1.0) - p[Pelvis.index()]).norm() < EPS);

        let seq = PoseSequence::from_positions(&[p, p], 240.0, Space::Global).unwrap();
        let world = CogConfig { anchor: CogAnchor::World, ..Default::default() };
        let roles = assign_roles(Handedness::Right);
        let a = metric_series(&seq, &roles, &world);
        let b = metric_series(&seq.translated(Vec3::new(1.0, 0.0, 0.0)), &roles, &world);
        let i = MetricName::CogX.index();
        assert_eq!(b[i].values[0] - a[i].values[0], 1.0);
    }

    #[test]
    fn degenerate_frames_carry_previous_value() {
        let s = carry_forward("x", Unit::Degrees, vec![None, Some(1.0), None, Some(3.0), None]);
        assert_eq!(s.values, vec![1.0, 1.0, 1.0, 3.0, 3.0]);
        assert_eq!(s.flagged, vec![0, 2, 4]);
    }
}
