//! Forward kinematics, Jacobian and closed-form pose initialization.

use nalgebra::{Matrix3, SVD};
use serde::{Deserialize, Serialize};

use super::skeleton::{coord, in_subtree, rest_direction, JointLimits, NUM_EDGES};
use crate::geom::Vec3;
use crate::pose::{JointId, NUM_JOINTS};

use JointId::*;

/// Rotation matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn rot_x(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    }

    pub fn rot_y(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    }

    pub fn rot_z(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Intrinsic Z-X-Y composition `Rz(a)·Rx(b)·Ry(c)`.
    pub fn zxy(a: [f64; 3]) -> Self {
        Self::rot_z(a[0]) * Self::rot_x(a[1]) * Self::rot_y(a[2])
    }

    /// Inverse of [`Mat3::zxy`] with the middle angle in [−90°, 90°].
    pub fn to_zxy(&self) -> [f64; 3] {
        let m = &self.0;
        let b = m[2][1].clamp(-1.0, 1.0).asin();
        let a = (-m[0][1]).atan2(m[1][1]);
        let c = (-m[2][0]).atan2(m[2][2]);
        [a.to_degrees(), b.to_degrees(), c.to_degrees()]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| m[j][i])))
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn from_cols(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Mat3([[a.x, b.x, c.x], [a.y, b.y, c.y], [a.z, b.z, c.z]])
    }

    fn from_na(m: &Matrix3<f64>) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
    }
}

impl std::ops::Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum())))
    }
}

impl std::ops::Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        let r = |i: usize| self.0[i][0] * v.x + self.0[i][1] * v.y + self.0[i][2] * v.z;
        Vec3::new(r(0), r(1), r(2))
    }
}

/// Generalized coordinates of the kinematic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAngles {
    pub root_pos: Vec3,
    /// Root (yaw, roll, pitch) in degrees.
    pub root_orient: [f64; 3],
    pub theta: [f64; coord::COUNT],
}

/// Total number of scalar parameters (3 translation + 3 root + angles).
pub const NUM_PARAMS: usize = 6 + coord::COUNT;

impl JointAngles {
    pub fn rest(root_pos: Vec3) -> Self {
        Self { root_pos, root_orient: [0.0; 3], theta: [0.0; coord::COUNT] }
    }

    pub fn to_params(&self) -> [f64; NUM_PARAMS] {
        let mut p = [0.0; NUM_PARAMS];
        p[..3].copy_from_slice(&<[f64; 3]>::from(self.root_pos));
        p[3..6].copy_from_slice(&self.root_orient);
        p[6..].copy_from_slice(&self.theta);
        p
    }

    pub fn from_params(p: &[f64; NUM_PARAMS]) -> Self {
        Self {
            root_pos: Vec3::new(p[0], p[1], p[2]),
            root_orient: [p[3], p[4], p[5]],
            theta: std::array::from_fn(|i| p[6 + i]),
        }
    }

    pub fn ball(&self, base: usize) -> [f64; 3] {
        [self.theta[base], self.theta[base + 1], self.theta[base + 2]]
    }

    /// Bounds per parameter, root translation unbounded.
    pub fn bounds(limits: &JointLimits) -> [(f64, f64); NUM_PARAMS] {
        std::array::from_fn(|i| match i {
            0..=2 => (f64::NEG_INFINITY, f64::INFINITY),
            3..=5 => (limits.root[i - 3].min, limits.root[i - 3].max),
            _ => (limits.theta[i - 6].min, limits.theta[i - 6].max),
        })
    }

    pub fn clamp(&mut self, limits: &JointLimits) {
        for (v, r) in self.root_orient.iter_mut().zip(&limits.root) {
            *v = r.clamp(*v);
        }
        for (v, r) in self.theta.iter_mut().zip(&limits.theta) {
            *v = r.clamp(*v);
        }
    }

    /// Largest amount by which any coordinate leaves its range (degrees).
    pub fn limit_violation(&self, limits: &JointLimits) -> f64 {
        self.root_orient
            .iter()
            .zip(&limits.root)
            .chain(self.theta.iter().zip(&limits.theta))
            .map(|(v, r)| (r.min - v).max(v - r.max).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// One rotational degree of freedom: world axis, pivot and the joint whose
/// subtree it moves.
#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub dir: Vec3,
    pub pivot: Vec3,
    pub subtree: JointId,
}

/// Positions plus per-parameter motion axes.
#[derive(Debug, Clone)]
pub struct FkResult {
    pub positions: [Vec3; NUM_JOINTS],
    /// Rotational axes in parameter order (root orientation first).
    pub axes: [Axis; NUM_PARAMS - 3],
}

/// Ball joint world axes for `Rparent·Rz(a)·Rx(b)·Ry(c)`.
fn ball_axes(parent: Mat3, a: [f64; 3], pivot: Vec3, subtree: JointId) -> ([Axis; 3], Mat3) {
    let rz = parent * Mat3::rot_z(a[0]);
    let rzx = rz * Mat3::rot_x(a[1]);
    let r = rzx * Mat3::rot_y(a[2]);
    let ax = |dir| Axis { dir, pivot, subtree };
    ([ax(parent.col(2)), ax(rz.col(0)), ax(rzx.col(1))], r)
}

pub fn fk(q: &JointAngles, lengths: &[f64; NUM_EDGES]) -> [Vec3; NUM_JOINTS] {
    fk_full(q, lengths).positions
}

pub fn fk_full(q: &JointAngles, lengths: &[f64; NUM_EDGES]) -> FkResult {
    let bone = |e: usize| rest_direction(e) * lengths[e];
    let mut p = [Vec3::zero(); NUM_JOINTS];
    let dummy = Axis { dir: Vec3::zero(), pivot: Vec3::zero(), subtree: Pelvis };
    let mut axes = [dummy; NUM_PARAMS - 3];
    fn put(axes: &mut [Axis], k: usize, a: [Axis; 3]) {
        axes[k..k + 3].copy_from_slice(&a);
    }

    let pelvis = q.root_pos;
    p[Pelvis.index()] = pelvis;
    let (root_axes, r_root) = ball_axes(Mat3::IDENTITY, q.root_orient, pelvis, Pelvis);
    put(&mut axes, 0, root_axes);
    p[LHip.index()] = pelvis + r_root * bone(0);
    p[RHip.index()] = pelvis + r_root * bone(1);

    let (lumbar_axes, r_torso) = ball_axes(r_root, q.ball(coord::LUMBAR), pelvis, Neck);
    put(&mut axes, 3 + coord::LUMBAR, lumbar_axes);
    let neck = pelvis + r_torso * bone(2);
    p[Neck.index()] = neck;
    p[LShoulder.index()] = neck + r_torso * bone(7);
    p[RShoulder.index()] = neck + r_torso * bone(8);

    let (neck_axes, r_head) = ball_axes(r_torso, q.ball(coord::NECK), neck, Nose);
    put(&mut axes, 3 + coord::NECK, neck_axes);
    let nose = neck + r_head * bone(9);
    p[Nose.index()] = nose;
    p[LEye.index()] = nose + r_head * bone(14);
    p[REye.index()] = nose + r_head * bone(15);

    // legs: hip ball then knee hinge (positive flexion swings the shank back)
    for (hip, knee, ankle, hip_c, knee_c, e_th, e_sh) in [
        (LHip, LKnee, LAnkle, coord::L_HIP, coord::L_KNEE, 3, 5),
        (RHip, RKnee, RAnkle, coord::R_HIP, coord::R_KNEE, 4, 6),
    ] {
        let hp = p[hip.index()];
        let (ax, r_th) = ball_axes(r_root, q.ball(hip_c), hp, knee);
        put(&mut axes, 3 + hip_c, ax);
        let kp = hp + r_th * bone(e_th);
        p[knee.index()] = kp;
        let r_sh = r_th * Mat3::rot_y(q.theta[knee_c]);
        axes[3 + knee_c] = Axis { dir: r_th.col(1), pivot: kp, subtree: ankle };
        p[ankle.index()] = kp + r_sh * bone(e_sh);
    }

    // arms: shoulder ball then elbow hinge (positive flexion swings the forearm forward)
    for (sh, el, wr, sh_c, el_c, e_ua, e_fa) in [
        (LShoulder, LElbow, LWrist, coord::L_SHOULDER, coord::L_ELBOW, 10, 12),
        (RShoulder, RElbow, RWrist, coord::R_SHOULDER, coord::R_ELBOW, 11, 13),
    ] {
        let sp = p[sh.index()];
        let (ax, r_ua) = ball_axes(r_torso, q.ball(sh_c), sp, el);
        put(&mut axes, 3 + sh_c, ax);
        let ep = sp + r_ua * bone(e_ua);
        p[el.index()] = ep;
        let r_fa = r_ua * Mat3::rot_y(-q.theta[el_c]);
        axes[3 + el_c] = Axis { dir: -r_ua.col(1), pivot: ep, subtree: wr };
        p[wr.index()] = ep + r_fa * bone(e_fa);
    }

    FkResult { positions: p, axes }
}

/// Jacobian of all joint positions (3·17 rows) w.r.t. the parameters, with
/// angular columns per radian.
pub fn jacobian(fkr: &FkResult) -> Vec<[f64; NUM_PARAMS]> {
    let mut jac = vec![[0.0; NUM_PARAMS]; 3 * NUM_JOINTS];
    for j in 0..NUM_JOINTS {
        for a in 0..3 {
            jac[3 * j + a][a] = 1.0;
        }
        let jid = JointId::from_index(j).expect("joint index in range");
        for (k, ax) in fkr.axes.iter().enumerate() {
            if in_subtree(jid, ax.subtree) {
                let d = ax.dir.cross(fkr.positions[j] - ax.pivot);
                for a in 0..3 {
                    jac[3 * j + a][3 + k] = d[a];
                }
            }
        }
    }
    jac
}

/// Best rotation `R` minimizing `Σ‖R·a_i − b_i‖²` (Kabsch).
fn kabsch(pairs: &[(Vec3, Vec3)]) -> Mat3 {
    let mut h = Matrix3::<f64>::zeros();
    for (a, b) in pairs {
        for i in 0..3 {
            for j in 0..3 {
                h[(i, j)] += a[i] * b[j];
            }
        }
    }
    let svd = SVD::new(h, true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let v = vt.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, if d == 0.0 { 1.0 } else { d }));
    Mat3::from_na(&(v * fix * u.transpose()))
}

/// Segment rotation for a limb whose bone points along −z at rest and whose
/// hinge axis is the local y axis. `axis_hint` is used when the limb is too
/// straight to define the hinge plane.
fn limb_frame(bone: Vec3, next: Vec3, hinge_sign: f64, axis_hint: Vec3) -> Mat3 {
    let u = match bone.try_normalize() {
        Ok(u) => u,
        Err(_) => return Mat3::IDENTITY,
    };
    let c = u.cross(next) * hinge_sign;
    let y = if c.norm() > 1e-6 * next.norm().max(1e-12) && c.norm() > 1e-9 {
        c / c.norm()
    } else {
        let h = axis_hint - u * axis_hint.dot(u);
        h.try_normalize().unwrap_or_else(|_| {
            let alt = Vec3::unit_x() - u * u.x;
            alt.try_normalize().unwrap_or(Vec3::unit_y())
        })
    };
    // local −z maps to u, local y maps to y
    let z = -u;
    let x = y.cross(z);
    Mat3::from_cols(x, y, z)
}

fn signed_angle(u: Vec3, v: Vec3) -> f64 {
    crate::geom::angle_between(u, v).unwrap_or(0.0)
}

/// Closed-form generalized coordinates matching `pos` as well as the
/// segment-wise geometry allows. Angles are clamped to `limits`.
pub fn initial_angles(pos: &[Vec3; NUM_JOINTS], lengths: &[f64; NUM_EDGES], limits: &JointLimits) -> JointAngles {
    let g = |j: JointId| pos[j.index()];
    let mut q = JointAngles::rest(g(Pelvis));

    let lat = g(LHip) - g(RHip);
    if let Ok(l) = lat.try_normalize() {
        q.root_orient = [(-l.x).atan2(l.y).to_degrees(), l.z.clamp(-1.0, 1.0).asin().to_degrees(), 0.0];
    }
    q.clamp(limits);
    let r_root = Mat3::zxy(q.root_orient);

    let bone = |e: usize| rest_direction(e) * lengths[e];
    let r_torso = kabsch(&[
        (bone(2), g(Neck) - g(Pelvis)),
        (bone(7), g(LShoulder) - g(Neck)),
        (bone(8), g(RShoulder) - g(Neck)),
    ]);
    let lumbar = (r_root.transpose() * r_torso).to_zxy();
    q.theta[coord::LUMBAR..coord::LUMBAR + 3].copy_from_slice(&lumbar);
    q.clamp(limits);
    let r_torso = r_root * Mat3::zxy(q.ball(coord::LUMBAR));

    let r_head = kabsch(&[
        (bone(9), g(Nose) - g(Neck)),
        (bone(14), g(LEye) - g(Nose)),
        (bone(15), g(REye) - g(Nose)),
    ]);
    let neck = (r_torso.transpose() * r_head).to_zxy();
    q.theta[coord::NECK..coord::NECK + 3].copy_from_slice(&neck);

    for (a, b, c, ball, hinge, parent, sign) in [
        (LHip, LKnee, LAnkle, coord::L_HIP, coord::L_KNEE, r_root, 1.0),
        (RHip, RKnee, RAnkle, coord::R_HIP, coord::R_KNEE, r_root, 1.0),
        (LShoulder, LElbow, LWrist, coord::L_SHOULDER, coord::L_ELBOW, r_torso, -1.0),
        (RShoulder, RElbow, RWrist, coord::R_SHOULDER, coord::R_ELBOW, r_torso, -1.0),
    ] {
        let upper = g(b) - g(a);
        let lower = g(c) - g(b);
        let r_seg = limb_frame(upper, lower, sign, parent.col(1));
        let local = (parent.transpose() * r_seg).to_zxy();
        q.theta[ball..ball + 3].copy_from_slice(&local);
        q.theta[hinge] = signed_angle(upper, lower);
    }
    q.clamp(limits);
    q
}
