//! Ground-truth geometry computed straight from the angle parameterization
//! with its own rotation code, independent of the pipeline's FK and metrics.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::geom::Vec3;
use crate::handedness::Handedness;
use crate::pose::{JointId, NUM_JOINTS};
use crate::refine::kinematics::JointAngles;
use crate::refine::skeleton::{coord, rest_direction, NUM_EDGES};

type M3 = Matrix3<f64>;
type V3 = Vector3<f64>;

fn rz(deg: f64) -> M3 {
    *Rotation3::from_axis_angle(&Vector3::z_axis(), deg.to_radians()).matrix()
}

fn rx(deg: f64) -> M3 {
    *Rotation3::from_axis_angle(&Vector3::x_axis(), deg.to_radians()).matrix()
}

fn ry(deg: f64) -> M3 {
    *Rotation3::from_axis_angle(&Vector3::y_axis(), deg.to_radians()).matrix()
}

fn zxy(a: [f64; 3]) -> M3 {
    rz(a[0]) * rx(a[1]) * ry(a[2])
}

fn bone(e: usize, lengths: &[f64; NUM_EDGES]) -> V3 {
    let d = rest_direction(e);
    V3::new(d.x, d.y, d.z) * lengths[e]
}

fn to_vec3(v: V3) -> Vec3 {
    Vec3::new(v.x, v.y, v.z)
}

/// Global segment orientations for one pose.
pub struct Segments {
    pub pelvis: M3,
    pub torso: M3,
    pub head: M3,
    /// Thigh, shank per side: `[left, right]`.
    pub thigh: [M3; 2],
    pub shank: [M3; 2],
    pub upper_arm: [M3; 2],
    pub forearm: [M3; 2],
}

pub fn segments(q: &JointAngles) -> Segments {
    let pelvis = zxy(q.root_orient);
    let torso = pelvis * zxy(q.ball(coord::LUMBAR));
    let head = torso * zxy(q.ball(coord::NECK));
    let thigh = [pelvis * zxy(q.ball(coord::L_HIP)), pelvis * zxy(q.ball(coord::R_HIP))];
    let shank = [thigh[0] * ry(q.theta[coord::L_KNEE]), thigh[1] * ry(q.theta[coord::R_KNEE])];
    let upper_arm = [torso * zxy(q.ball(coord::L_SHOULDER)), torso * zxy(q.ball(coord::R_SHOULDER))];
    let forearm = [upper_arm[0] * ry(-q.theta[coord::L_ELBOW]), upper_arm[1] * ry(-q.theta[coord::R_ELBOW])];
    Segments { pelvis, torso, head, thigh, shank, upper_arm, forearm }
}

/// Joint positions for one pose.
pub fn positions(q: &JointAngles, lengths: &[f64; NUM_EDGES]) -> [Vec3; NUM_JOINTS] {
    use JointId::*;
    let s = segments(q);
    let b = |e| bone(e, lengths);
    let pelvis = V3::new(q.root_pos.x, q.root_pos.y, q.root_pos.z);
    let mut p = [V3::zeros(); NUM_JOINTS];
    p[Pelvis.index()] = pelvis;
    p[LHip.index()] = pelvis + s.pelvis * b(0);
    p[RHip.index()] = pelvis + s.pelvis * b(1);
    let neck = pelvis + s.torso * b(2);
    p[Neck.index()] = neck;
    p[LShoulder.index()] = neck + s.torso * b(7);
    p[RShoulder.index()] = neck + s.torso * b(8);
    let nose = neck + s.head * b(9);
    p[Nose.index()] = nose;
    p[LEye.index()] = nose + s.head * b(14);
    p[REye.index()] = nose + s.head * b(15);
    for (side, (hip, knee, ankle, e_th, e_sh)) in [(LHip, LKnee, LAnkle, 3, 5), (RHip, RKnee, RAnkle, 4, 6)].into_iter().enumerate() {
        p[knee.index()] = p[hip.index()] + s.thigh[side] * b(e_th);
        p[ankle.index()] = p[knee.index()] + s.shank[side] * b(e_sh);
    }
    for (side, (sh, el, wr, e_ua, e_fa)) in [(LShoulder, LElbow, LWrist, 10, 12), (RShoulder, RElbow, RWrist, 11, 13)].into_iter().enumerate() {
        p[el.index()] = p[sh.index()] + s.upper_arm[side] * b(e_ua);
        p[wr.index()] = p[el.index()] + s.forearm[side] * b(e_fa);
    }
    p.map(to_vec3)
}

fn wrap(deg: f64) -> f64 {
    let r = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if r == -180.0 { 180.0 } else { r }
}

/// Rotation of a segment's lateral (+y) axis in the horizontal plane,
/// zero when square to home.
fn line_angle(r: &M3) -> f64 {
    wrap(r[(1, 1)].atan2(r[(0, 1)]).to_degrees() - 90.0)
}

/// The 18 metrics in registry order for one pose. `anchor` is the COG origin.
pub fn metrics(q: &JointAngles, lengths: &[f64; NUM_EDGES], side: Handedness, anchor: Vec3) -> [f64; 18] {
    let s = side.sign();
    let seg = segments(q);
    // lead/trail leg and throw/glove arm indices into [left, right]
    let (lead, trail, throw, glove) = match side {
        Handedness::Right => (0, 1, 1, 0),
        Handedness::Left => (1, 0, 0, 1),
    };
    let (knee_c, elbow_c) = ([coord::L_KNEE, coord::R_KNEE], [coord::L_ELBOW, coord::R_ELBOW]);
    let shin = |k: usize| {
        // knee minus ankle points up the shank
        let v = seg.shank[k] * V3::new(0.0, 0.0, 1.0);
        ((s * v.y).atan2(v.z).to_degrees(), v.x.atan2(v.z).to_degrees())
    };
    let abduction = |k: usize| seg.upper_arm[k][(2, 2)].clamp(-1.0, 1.0).acos().to_degrees();
    let pelvis_rot = s * line_angle(&seg.pelvis);
    let torso_rot = s * line_angle(&seg.torso);

    let mid_hip = seg.pelvis * (bone(0, lengths) + bone(1, lengths)) * 0.5;
    let mid_sh = seg.torso * (bone(2, lengths) * 2.0 + bone(7, lengths) + bone(8, lengths)) * 0.5;
    let t = mid_sh - mid_hip;
    let pelvis = V3::new(q.root_pos.x, q.root_pos.y, q.root_pos.z);
    let cog = pelvis * 0.6 + (pelvis + mid_sh) * 0.4 - V3::new(anchor.x, anchor.y, anchor.z);

    let (sxl, syl) = shin(lead);
    let (sxt, syt) = shin(trail);
    [
        q.theta[knee_c[lead]],
        q.theta[knee_c[trail]],
        sxl,
        syl,
        sxt,
        syt,
        q.theta[elbow_c[throw]],
        q.theta[elbow_c[glove]],
        abduction(throw),
        abduction(glove),
        pelvis_rot,
        torso_rot,
        wrap(torso_rot - pelvis_rot),
        t.x.atan2(t.z).to_degrees(),
        (s * t.y).atan2(t.z).to_degrees(),
        cog.x,
        s * cog.y,
        cog.z,
    ]
}

/// Unit vector the torso faces for one pose (shoulder line × trunk axis).
pub fn trunk_forward(q: &JointAngles, lengths: &[f64; NUM_EDGES]) -> V3 {
    let seg = segments(q);
    let lateral = seg.torso * (bone(7, lengths) - bone(8, lengths));
    let up = seg.torso * (bone(2, lengths) * 2.0 + bone(7, lengths) + bone(8, lengths)) * 0.5 - seg.pelvis * (bone(0, lengths) + bone(1, lengths)) * 0.5;
    lateral.cross(&up).normalize()
}

/// Root pitch `c` of the lumbar ball that gives forward trunk tilt `tau`
/// (degrees) with the other angles of `q` held fixed. Shoulder offsets are
/// assumed symmetric so the trunk axis is the torso z axis.
pub fn lumbar_pitch_for_tilt(q: &JointAngles, tau: f64) -> f64 {
    let b = q.ball(coord::LUMBAR);
    let m = zxy(q.root_orient) * rz(b[0]) * rx(b[1]);
    let (st, ct) = tau.to_radians().sin_cos();
    let a = m[(0, 0)] * ct - m[(2, 0)] * st;
    let bb = m[(0, 2)] * ct - m[(2, 2)] * st;
    // a sin c + bb cos c = 0; pick the root with the trunk pointing up
    let c = (-bb).atan2(a);
    let up = |c: f64| m[(2, 0)] * c.sin() + m[(2, 2)] * c.cos();
    let c = if up(c) > 0.0 { c } else { c + std::f64::consts::PI };
    wrap(c.to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::kinematics::fk;
    use crate::refine::skeleton::SkeletonModel;

    fn pose() -> JointAngles {
        let mut q = JointAngles::rest(Vec3::new(1.0, -0.5, 3.0));
        q.root_orient = [-100.0, 7.0, 0.0];
        let vals = [12.0, -8.0, 25.0, 5.0, 3.0, -4.0, 10.0, 15.0, -50.0, -5.0, -10.0, 20.0, 45.0, 20.0, 30.0, 40.0, -20.0, 20.0, -60.0, 40.0, 80.0, 60.0];
        q.theta.copy_from_slice(&vals);
        q
    }

    #[test]
    fn agrees_with_pipeline_fk() {
        let skel = SkeletonModel::default();
        let q = pose();
        let a = positions(&q, &skel.lengths);
        let b = fk(&q, &skel.lengths);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.max_abs_diff(*y) < 1e-12, "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn lumbar_pitch_hits_tilt() {
        let skel = SkeletonModel::default();
        let mut q = pose();
        for tau in [-10.0, 0.0, 25.0, 40.0] {
            q.theta[coord::LUMBAR + 2] = lumbar_pitch_for_tilt(&q, tau);
            let m = metrics(&q, &skel.lengths, Handedness::Right, Vec3::zero());
            assert!((m[13] - tau).abs() < 1e-9, "{tau}: {}", m[13]);
        }
    }
}
