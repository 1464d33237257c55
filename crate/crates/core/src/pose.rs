//! Joint topology and pose sequences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;

pub const NUM_JOINTS: usize = 17;

/// Tolerance on the pelvis position of a pelvis-rooted frame (ft).
pub const PELVIS_ROOT_TOL: f64 = 1e-9;

/// The 17 joints, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointId {
    Nose = 0,
    Neck = 1,
    LShoulder = 2,
    RShoulder = 3,
    LElbow = 4,
    RElbow = 5,
    LWrist = 6,
    RWrist = 7,
    Pelvis = 8,
    LHip = 9,
    RHip = 10,
    LKnee = 11,
    RKnee = 12,
    LAnkle = 13,
    RAnkle = 14,
    LEye = 15,
    REye = 16,
}

impl JointId {
    pub const ALL: [JointId; NUM_JOINTS] = [
        JointId::Nose,
        JointId::Neck,
        JointId::LShoulder,
        JointId::RShoulder,
        JointId::LElbow,
        JointId::RElbow,
        JointId::LWrist,
        JointId::RWrist,
        JointId::Pelvis,
        JointId::LHip,
        JointId::RHip,
        JointId::LKnee,
        JointId::RKnee,
        JointId::LAnkle,
        JointId::RAnkle,
        JointId::LEye,
        JointId::REye,
    ];

    pub const ROOT: JointId = JointId::Pelvis;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<JointId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            JointId::Nose => "nose",
            JointId::Neck => "neck",
            JointId::LShoulder => "l_shoulder",
            JointId::RShoulder => "r_shoulder",
            JointId::LElbow => "l_elbow",
            JointId::RElbow => "r_elbow",
            JointId::LWrist => "l_wrist",
            JointId::RWrist => "r_wrist",
            JointId::Pelvis => "pelvis",
            JointId::LHip => "l_hip",
            JointId::RHip => "r_hip",
            JointId::LKnee => "l_knee",
            JointId::RKnee => "r_knee",
            JointId::LAnkle => "l_ankle",
            JointId::RAnkle => "r_ankle",
            JointId::LEye => "l_eye",
            JointId::REye => "r_eye",
        }
    }

    /// The contralateral joint; midline joints map to themselves.
    pub fn mirror(self) -> JointId {
        use JointId::*;
        match self {
            LShoulder => RShoulder,
            RShoulder => LShoulder,
            LElbow => RElbow,
            RElbow => LElbow,
            LWrist => RWrist,
            RWrist => LWrist,
            LHip => RHip,
            RHip => LHip,
            LKnee => RKnee,
            RKnee => LKnee,
            LAnkle => RAnkle,
            RAnkle => LAnkle,
            LEye => REye,
            REye => LEye,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Joint {
    pub pos: Vec3,
    /// Detector confidence in `[0, 1]`.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t_ms: i64,
    pub joints: [Joint; NUM_JOINTS],
}

impl Frame {
    pub fn from_positions(t_ms: i64, pos: &[Vec3; NUM_JOINTS]) -> Frame {
        let mut joints = [Joint::default(); NUM_JOINTS];
        for (j, p) in joints.iter_mut().zip(pos) {
            *j = Joint { pos: *p, c: 1.0 };
        }
        Frame { t_ms, joints }
    }

    #[inline]
    pub fn pos(&self, j: JointId) -> Vec3 {
        self.joints[j.index()].pos
    }

    #[inline]
    pub fn set_pos(&mut self, j: JointId, p: Vec3) {
        self.joints[j.index()].pos = p;
    }

    pub fn positions(&self) -> [Vec3; NUM_JOINTS] {
        let mut out = [Vec3::zero(); NUM_JOINTS];
        for (o, j) in out.iter_mut().zip(&self.joints) {
            *o = j.pos;
        }
        out
    }

    pub fn translated(&self, d: Vec3) -> Frame {
        let mut f = self.clone();
        for j in f.joints.iter_mut() {
            j.pos += d;
        }
        f
    }

    /// Reflection across the x–z plane with left/right labels exchanged, which
    /// turns a right-handed delivery into an anatomically valid left-handed one.
    pub fn mirrored(&self) -> Frame {
        let mut joints = [Joint::default(); NUM_JOINTS];
        for id in JointId::ALL {
            let src = self.joints[id.mirror().index()];
            joints[id.index()] = Joint { pos: src.pos.reflect_y(), c: src.c };
        }
        Frame { t_ms: self.t_ms, joints }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    PelvisRooted,
    Global,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    #[error("sequence has {0} frames, need at least 2")]
    TooShort(usize),
    #[error("non-finite coordinate at frame {frame}, joint {joint}")]
    NonFinite { frame: usize, joint: &'static str },
    #[error("confidence {c} outside [0, 1] at frame {frame}, joint {joint}")]
    BadConfidence { frame: usize, joint: &'static str, c: f64 },
    #[error("frame {frame} is tagged pelvis-rooted but pelvis is {dist:e} ft from origin")]
    NotPelvisRooted { frame: usize, dist: f64 },
    #[error("fps must be positive and finite, got {0}")]
    BadFps(f64),
}

/// An ordered, uniformly sampled sequence of 17-joint frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    frames: Vec<Frame>,
    fps: f64,
    space: Space,
}

impl PoseSequence {
    pub fn new(frames: Vec<Frame>, fps: f64, space: Space) -> Result<Self, PoseError> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(PoseError::BadFps(fps));
        }
        if frames.len() < 2 {
            return Err(PoseError::TooShort(frames.len()));
        }
        for (t, f) in frames.iter().enumerate() {
            for id in JointId::ALL {
                let j = f.joints[id.index()];
                if !j.pos.is_finite() || !j.c.is_finite() {
                    return Err(PoseError::NonFinite { frame: t, joint: id.name() });
                }
                if !(0.0..=1.0).contains(&j.c) {
                    return Err(PoseError::BadConfidence { frame: t, joint: id.name(), c: j.c });
                }
            }
            if space == Space::PelvisRooted {
                let d = f.pos(JointId::Pelvis).norm();
                if d >= PELVIS_ROOT_TOL {
                    return Err(PoseError::NotPelvisRooted { frame: t, dist: d });
                }
            }
        }
        Ok(Self { frames, fps, space })
    }

    /// Builds a sequence from positions only, stamping `t_ms` from the frame index.
    pub fn from_positions(
        positions: &[[Vec3; NUM_JOINTS]],
        fps: f64,
        space: Space,
    ) -> Result<Self, PoseError> {
        let frames = positions
            .iter()
            .enumerate()
            .map(|(i, p)| Frame::from_positions(frame_time_ms(i, fps), p))
            .collect();
        Self::new(frames, fps, space)
    }

    #[inline]
    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    #[inline]
    pub fn frame(&self, t: usize) -> &Frame {
        &self.frames[t]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    #[inline]
    pub fn fps(&self) -> f64 {
        self.fps
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    /// Trajectory of one joint over the whole sequence.
    pub fn track(&self, j: JointId) -> Vec<Vec3> {
        self.frames.iter().map(|f| f.pos(j)).collect()
    }

    /// Replaces positions while keeping timestamps and confidences.
    pub fn with_positions(&self, positions: &[[Vec3; NUM_JOINTS]]) -> Result<Self, PoseError> {
        assert_eq!(positions.len(), self.frames.len(), "frame count mismatch");
        let frames = self
            .frames
            .iter()
            .zip(positions)
            .map(|(f, p)| {
                let mut g = f.clone();
                for (j, q) in g.joints.iter_mut().zip(p) {
                    j.pos = *q;
                }
                g
            })
            .collect();
        Self::new(frames, self.fps, self.space)
    }

    /// Same frames relabelled as global coordinates.
    pub fn as_global(&self) -> PoseSequence {
        PoseSequence { frames: self.frames.clone(), fps: self.fps, space: Space::Global }
    }

    pub fn positions(&self) -> Vec<[Vec3; NUM_JOINTS]> {
        self.frames.iter().map(Frame::positions).collect()
    }

    pub fn mirrored(&self) -> PoseSequence {
        PoseSequence {
            frames: self.frames.iter().map(Frame::mirrored).collect(),
            fps: self.fps,
            space: self.space,
        }
    }

    /// Subtracts the pelvis from every joint.
    pub fn to_pelvis_rooted(&self) -> PoseSequence {
        let frames = self
            .frames
            .iter()
            .map(|f| {
                let p = f.pos(JointId::Pelvis);
                let mut g = f.translated(-p);
                g.set_pos(JointId::Pelvis, Vec3::zero());
                g
            })
            .collect();
        PoseSequence { frames, fps: self.fps, space: Space::PelvisRooted }
    }

    pub fn translated(&self, d: Vec3) -> PoseSequence {
        PoseSequence {
            frames: self.frames.iter().map(|f| f.translated(d)).collect(),
            fps: self.fps,
            space: Space::Global,
        }
    }
}

/// Timestamp of frame `i` at `fps`, rounded to the millisecond.
pub fn frame_time_ms(i: usize, fps: f64) -> i64 {
    (i as f64 * 1000.0 / fps).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still(n: usize) -> Vec<Frame> {
        (0..n).map(|i| Frame::from_positions(i as i64, &[Vec3::zero(); NUM_JOINTS])).collect()
    }

    #[test]
    fn topology() {
        assert_eq!(JointId::ALL.len(), 17);
        assert_eq!(JointId::Pelvis.index(), 8);
        assert_eq!(JointId::ROOT, JointId::Pelvis);
        for (i, j) in JointId::ALL.iter().enumerate() {
            assert_eq!(j.index(), i);
            assert_eq!(j.mirror().mirror(), *j);
        }
    }

    #[test]
    fn rejects_short_and_invalid() {
        assert_eq!(PoseSequence::new(still(1), 1000.0, Space::Global), Err(PoseError::TooShort(1)));
        let mut f = still(3);
        f[1].joints[4].c = 1.5;
        assert!(matches!(
            PoseSequence::new(f, 1000.0, Space::Global),
            Err(PoseError::BadConfidence { frame: 1, .. })
        ));
        let mut f = still(3);
        f[2].joints[0].pos.x = f64::NAN;
        assert!(matches!(PoseSequence::new(f, 1000.0, Space::Global), Err(PoseError::NonFinite { frame: 2, .. })));
        let mut f = still(3);
        f[0].joints[8].pos.z = 1e-3;
        assert!(matches!(
            PoseSequence::new(f, 1000.0, Space::PelvisRooted),
            Err(PoseError::NotPelvisRooted { frame: 0, .. })
        ));
    }

    #[test]
    fn mirror_is_involution() {
        let mut f = still(2);
        f[0].set_pos(JointId::LWrist, Vec3::new(1.0, 2.0, 3.0));
        let s = PoseSequence::new(f, 1000.0, Space::Global).unwrap();
        let m = s.mirrored();
        assert_eq!(m.frame(0).pos(JointId::RWrist), Vec3::new(1.0, -2.0, 3.0));
        assert_eq!(m.mirrored(), s);
    }
}
