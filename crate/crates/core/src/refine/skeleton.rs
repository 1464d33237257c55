//! Kinematic tree, bone lengths, joint limits and IK weights.
//!
//! The tree is rooted at the pelvis. Angular coordinates are degrees; ball
//! joints use intrinsic Z-X-Y Euler angles relative to the parent segment and
//! hinges rotate about the parent segment's lateral (y) axis. At rest the
//! body stands upright facing +x with its left side toward +y and arms
//! hanging straight down.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::pose::{JointId, PoseSequence, NUM_JOINTS};

use JointId::*;

/// Directed bones in topological (parent before child) order.
pub const EDGES: [(JointId, JointId); 16] = [
    (Pelvis, LHip),
    (Pelvis, RHip),
    (Pelvis, Neck),
    (LHip, LKnee),
    (RHip, RKnee),
    (LKnee, LAnkle),
    (RKnee, RAnkle),
    (Neck, LShoulder),
    (Neck, RShoulder),
    (Neck, Nose),
    (LShoulder, LElbow),
    (RShoulder, RElbow),
    (LElbow, LWrist),
    (RElbow, RWrist),
    (Nose, LEye),
    (Nose, REye),
];

pub const NUM_EDGES: usize = EDGES.len();

/// Left/right edge pairs tied together by symmetry enforcement.
pub const SYMMETRIC_PAIRS: [(usize, usize); 7] = [(0, 1), (3, 4), (5, 6), (7, 8), (10, 11), (12, 13), (14, 15)];

/// Unit direction of each bone in its segment frame at rest, and the default
/// length in feet.
const REST: [([f64; 3], f64); NUM_EDGES] = [
    ([0.0, 1.0, 0.0], 0.30),
    ([0.0, -1.0, 0.0], 0.30),
    ([0.0, 0.0, 1.0], 1.75),
    ([0.0, 0.0, -1.0], 1.45),
    ([0.0, 0.0, -1.0], 1.45),
    ([0.0, 0.0, -1.0], 1.45),
    ([0.0, 0.0, -1.0], 1.45),
    ([0.0, 0.948_683_298_050_513_8, -0.316_227_766_016_837_94], 0.632_455_532_033_675_9),
    ([0.0, -0.948_683_298_050_513_8, -0.316_227_766_016_837_94], 0.632_455_532_033_675_9),
    ([0.554_700_196_225_229_1, 0.0, 0.832_050_294_337_843_7], 0.540_832_691_319_598),
    ([0.0, 0.0, -1.0], 0.95),
    ([0.0, 0.0, -1.0], 0.95),
    ([0.0, 0.0, -1.0], 0.85),
    ([0.0, 0.0, -1.0], 0.85),
    ([-0.316_227_766_016_837_94, 0.948_683_298_050_513_8, 0.0], 0.158_113_883_008_418_97),
    ([-0.316_227_766_016_837_94, -0.948_683_298_050_513_8, 0.0], 0.158_113_883_008_418_97),
];

pub fn edge_index(parent: JointId, child: JointId) -> Option<usize> {
    EDGES.iter().position(|&(p, c)| p == parent && c == child)
}

pub fn edge_name(e: usize) -> String {
    format!("{}-{}", EDGES[e].0.name(), EDGES[e].1.name())
}

pub fn parent_of(j: JointId) -> Option<JointId> {
    EDGES.iter().find(|(_, c)| *c == j).map(|(p, _)| *p)
}

/// Whether `j` lies in the subtree rooted at `root` (inclusive).
pub fn in_subtree(j: JointId, root: JointId) -> bool {
    let mut cur = Some(j);
    while let Some(c) = cur {
        if c == root {
            return true;
        }
        cur = parent_of(c);
    }
    false
}

pub fn rest_direction(e: usize) -> Vec3 {
    Vec3::from(REST[e].0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofClass {
    /// Six-DOF floating base plus the lumbar ball carrying the torso.
    Root,
    Ball3,
    Hinge1,
    Fixed,
}

pub fn dof_class(j: JointId) -> DofClass {
    match j {
        Pelvis => DofClass::Root,
        Neck | LHip | RHip | LShoulder | RShoulder => DofClass::Ball3,
        LKnee | RKnee | LElbow | RElbow => DofClass::Hinge1,
        _ => DofClass::Fixed,
    }
}

/// Layout of the angular coordinate vector (excluding the root orientation).
pub mod coord {
    pub const LUMBAR: usize = 0;
    pub const NECK: usize = 3;
    pub const L_HIP: usize = 6;
    pub const R_HIP: usize = 9;
    pub const L_KNEE: usize = 12;
    pub const R_KNEE: usize = 13;
    pub const L_SHOULDER: usize = 14;
    pub const R_SHOULDER: usize = 17;
    pub const L_ELBOW: usize = 20;
    pub const R_ELBOW: usize = 21;
    pub const COUNT: usize = 22;

    pub const NAMES: [&str; COUNT] = [
        "lumbar_z", "lumbar_x", "lumbar_y", "neck_z", "neck_x", "neck_y", "l_hip_z", "l_hip_x", "l_hip_y", "r_hip_z",
        "r_hip_x", "r_hip_y", "l_knee", "r_knee", "l_shoulder_z", "l_shoulder_x", "l_shoulder_y", "r_shoulder_z",
        "r_shoulder_x", "r_shoulder_y", "l_elbow", "r_elbow",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn sym(v: f64) -> Self {
        Self { min: -v, max: v }
    }

    pub fn clamp(self, v: f64) -> f64 {
        v.max(self.min).min(self.max)
    }

    /// Range seen by the contralateral side for a coordinate that flips sign.
    pub fn mirrored(self) -> Self {
        Self { min: -self.max, max: -self.min }
    }
}

/// Per-coordinate joint limits (degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct JointLimits {
    /// Root (yaw, roll, pitch). Pitch about the hip line is not observable
    /// from pelvis and hips alone and is pinned to zero by default.
    pub root: [Range; 3],
    pub theta: [Range; coord::COUNT],
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkeletonError {
    #[error("degenerate skeleton: bone {bone} has length {length:e} ft")]
    DegenerateSkeleton { bone: String, length: f64 },
    #[error("reference window needs 1 <= N <= {len} frames, got {n}")]
    BadWindow { n: usize, len: usize },
    #[error("invalid skeleton config: {0}")]
    Config(String),
}

/// Minimum admissible bone length (ft).
pub const MIN_BONE_LENGTH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonModel {
    pub lengths: [f64; NUM_EDGES],
    /// World-space directions used when a bone collapses on the first frame.
    pub fallback_dirs: [Vec3; NUM_EDGES],
    pub limits: JointLimits,
    pub weights: [f64; NUM_JOINTS],
}

impl Default for SkeletonModel {
    fn default() -> Self {
        SkeletonConfig::default().build(None).expect("default skeleton config is valid")
    }
}

impl SkeletonModel {
    pub fn length(&self, parent: JointId, child: JointId) -> Option<f64> {
        edge_index(parent, child).map(|e| self.lengths[e])
    }

    pub fn with_lengths(&self, lengths: [f64; NUM_EDGES]) -> Self {
        Self { lengths, ..self.clone() }
    }

    /// Largest `|‖child − parent‖ − ℓ|` over all bones and frames.
    pub fn max_length_deviation(&self, positions: &[[Vec3; NUM_JOINTS]]) -> f64 {
        positions
            .iter()
            .flat_map(|p| {
                EDGES
                    .iter()
                    .zip(&self.lengths)
                    .map(move |((a, b), l)| ((p[b.index()] - p[a.index()]).norm() - l).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        SYMMETRIC_PAIRS.iter().all(|&(a, b)| self.lengths[a] == self.lengths[b])
    }
}

/// Reference skeleton from the coordinate-wise median of the first `n` frames.
pub fn reference_skeleton(seq: &PoseSequence, n: usize, base: &SkeletonModel) -> Result<SkeletonModel, SkeletonError> {
    if n == 0 || n > seq.len() {
        return Err(SkeletonError::BadWindow { n, len: seq.len() });
    }
    let frames = &seq.frames()[..n];
    let mut median_pose = [Vec3::zero(); NUM_JOINTS];
    for (j, out) in median_pose.iter_mut().enumerate() {
        for axis in 0..3 {
            let mut vals: Vec<f64> = frames.iter().map(|f| f.joints[j].pos[axis]).collect();
            out[axis] = median(&mut vals);
        }
    }
    let mut lengths = [0.0; NUM_EDGES];
    let mut dirs = [Vec3::zero(); NUM_EDGES];
    for (e, &(p, c)) in EDGES.iter().enumerate() {
        let d = median_pose[c.index()] - median_pose[p.index()];
        let l = d.norm();
        if l < MIN_BONE_LENGTH {
            return Err(SkeletonError::DegenerateSkeleton { bone: edge_name(e), length: l });
        }
        lengths[e] = l;
        dirs[e] = d / l;
    }
    Ok(SkeletonModel { lengths, fallback_dirs: dirs, ..base.clone() })
}

/// Median with the even-count convention of averaging the two middle values.
pub fn median(vals: &mut [f64]) -> f64 {
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    }
}

/// File-backed skeleton configuration (TOML). Ball limits are `[z, x, y]`
/// ranges for the left side; the right side uses the mirror image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkeletonConfig {
    /// Bone length overrides keyed `parent-child` (ft).
    pub lengths: std::collections::BTreeMap<String, f64>,
    pub root_roll: [f64; 2],
    pub root_pitch: [f64; 2],
    pub lumbar: [[f64; 2]; 3],
    pub neck: [[f64; 2]; 3],
    pub hip: [[f64; 2]; 3],
    pub shoulder: [[f64; 2]; 3],
    pub knee: [f64; 2],
    pub elbow: [f64; 2],
    pub default_weight: f64,
    /// Weight of wrists and ankles, which carry most of the metric signal.
    pub end_effector_weight: f64,
    /// Per-joint weight overrides keyed by joint name.
    pub weights: std::collections::BTreeMap<String, f64>,
}

impl Default for SkeletonConfig {
    fn default() -> Self {
        Self {
            lengths: Default::default(),
            root_roll: [-60.0, 60.0],
            root_pitch: [0.0, 0.0],
            lumbar: [[-80.0, 80.0], [-60.0, 60.0], [-80.0, 80.0]],
            neck: [[-45.0, 45.0], [-45.0, 45.0], [-45.0, 45.0]],
            hip: [[-60.0, 60.0], [-60.0, 60.0], [-120.0, 120.0]],
            shoulder: [[-180.0, 180.0], [-90.0, 90.0], [-150.0, 150.0]],
            knee: [0.0, 150.0],
            elbow: [0.0, 150.0],
            default_weight: 1.0,
            end_effector_weight: 3.0,
            weights: Default::default(),
        }
    }
}

impl SkeletonConfig {
    pub fn from_toml(text: &str) -> Result<Self, SkeletonError> {
        toml::from_str(text).map_err(|e| SkeletonError::Config(e.to_string()))
    }

    /// Builds a model; lengths come from `lengths` when given, else the
    /// defaults, then config overrides apply.
    pub fn build(&self, lengths: Option<[f64; NUM_EDGES]>) -> Result<SkeletonModel, SkeletonError> {
        let range = |r: [f64; 2], what: &str| -> Result<Range, SkeletonError> {
            if r[0] <= r[1] && r[0].is_finite() && r[1].is_finite() {
                Ok(Range::new(r[0], r[1]))
            } else {
                Err(SkeletonError::Config(format!("{what}: min {} > max {}", r[0], r[1])))
            }
        };
        let mut theta = [Range::sym(0.0); coord::COUNT];
        let mut ball = |base: usize, r: &[[f64; 2]; 3], mirror_base: Option<usize>, what: &str| -> Result<(), SkeletonError> {
            for k in 0..3 {
                let rg = range(r[k], what)?;
                theta[base + k] = rg;
                if let Some(m) = mirror_base {
                    // reflection across the sagittal plane flips z and x rotations
                    theta[m + k] = if k == 2 { rg } else { rg.mirrored() };
                }
            }
            Ok(())
        };
        ball(coord::LUMBAR, &self.lumbar, None, "lumbar")?;
        ball(coord::NECK, &self.neck, None, "neck")?;
        ball(coord::L_HIP, &self.hip, Some(coord::R_HIP), "hip")?;
        ball(coord::L_SHOULDER, &self.shoulder, Some(coord::R_SHOULDER), "shoulder")?;
        let knee = range(self.knee, "knee")?;
        let elbow = range(self.elbow, "elbow")?;
        theta[coord::L_KNEE] = knee;
        theta[coord::R_KNEE] = knee;
        theta[coord::L_ELBOW] = elbow;
        theta[coord::R_ELBOW] = elbow;
        let limits = JointLimits {
            root: [
                Range::new(f64::NEG_INFINITY, f64::INFINITY),
                range(self.root_roll, "root_roll")?,
                range(self.root_pitch, "root_pitch")?,
            ],
            theta,
        };

        let mut lens = lengths.unwrap_or_else(|| REST.map(|(_, l)| l));
        for (name, v) in &self.lengths {
            let e = (0..NUM_EDGES)
                .find(|&e| edge_name(e) == *name)
                .ok_or_else(|| SkeletonError::Config(format!("unknown bone {name:?}")))?;
            lens[e] = *v;
        }
        for (e, l) in lens.iter().enumerate() {
            if !(l.is_finite() && *l >= MIN_BONE_LENGTH) {
                return Err(SkeletonError::DegenerateSkeleton { bone: edge_name(e), length: *l });
            }
        }

        if !(self.default_weight >= 0.0) {
            return Err(SkeletonError::Config("default_weight must be >= 0".into()));
        }
        let mut weights = [self.default_weight; NUM_JOINTS];
        for j in [LWrist, RWrist, LAnkle, RAnkle] {
            weights[j.index()] = self.end_effector_weight;
        }
        for (name, w) in &self.weights {
            let j = JointId::ALL
                .iter()
                .find(|j| j.name() == name)
                .ok_or_else(|| SkeletonError::Config(format!("unknown joint {name:?}")))?;
            if !(*w >= 0.0) {
                return Err(SkeletonError::Config(format!("weight for {name} must be >= 0")));
            }
            weights[j.index()] = *w;
        }

        // fallback directions: rest pose in world space
        let rest = super::kinematics::fk(&super::kinematics::JointAngles::rest(Vec3::zero()), &lens);
        let fallback_dirs = std::array::from_fn(|e| {
            let (p, c) = EDGES[e];
            (rest[c.index()] - rest[p.index()]) / lens[e]
        });
        Ok(SkeletonModel { lengths: lens, fallback_dirs, limits, weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Space;

    #[test]
    fn edges_span_the_tree() {
        let mut seen = [false; NUM_JOINTS];
        seen[Pelvis.index()] = true;
        for (p, c) in EDGES {
            assert!(seen[p.index()], "parent {p:?} must precede child");
            assert!(!seen[c.index()], "{c:?} has two parents");
            seen[c.index()] = true;
        }
        assert!(seen.iter().all(|s| *s));
        for (d, _) in REST {
            assert!((Vec3::from(d).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pairs_are_mirror_images() {
        for (a, b) in SYMMETRIC_PAIRS {
            assert_eq!(EDGES[a].0.mirror(), EDGES[b].0);
            assert_eq!(EDGES[a].1.mirror(), EDGES[b].1);
            assert_eq!(rest_direction(a).reflect_y(), rest_direction(b));
        }
        assert!(SkeletonModel::default().is_symmetric());
    }

    #[test]
    fn subtree_membership() {
        assert!(in_subtree(LWrist, LShoulder));
        assert!(in_subtree(LEye, Neck));
        assert!(!in_subtree(RKnee, LHip));
        assert!(in_subtree(RAnkle, Pelvis));
    }

    fn seq_from(poses: Vec<[Vec3; NUM_JOINTS]>) -> PoseSequence {
        PoseSequence::from_positions(&poses, 1000.0, Space::Global).unwrap()
    }

    #[test]
    fn reference_lengths_from_constant_pose() {
        let base = SkeletonModel::default();
        let pose = crate::refine::kinematics::fk(&crate::refine::kinematics::JointAngles::rest(Vec3::new(0., 0., 3.2)), &base.lengths);
        let skel = reference_skeleton(&seq_from(vec![pose; 30]), 30, &base).unwrap();
        for (a, b) in skel.lengths.iter().zip(&base.lengths) {
            assert!((a - b).abs() < 1e-9);
        }
        let one = reference_skeleton(&seq_from(vec![pose; 30]), 1, &base).unwrap();
        assert_eq!(one.lengths, skel.lengths);
    }

    #[test]
    fn reference_is_robust_to_one_outlier() {
        let base = SkeletonModel::default();
        let pose = crate::refine::kinematics::fk(&crate::refine::kinematics::JointAngles::rest(Vec3::new(0., 0., 3.2)), &base.lengths);
        let mut poses = vec![pose; 30];
        for p in poses[11].iter_mut() {
            *p += Vec3::new(0.7, -0.4, 2.0);
        }
        poses[11][LWrist.index()] += Vec3::new(5.0, 5.0, 5.0);
        let skel = reference_skeleton(&seq_from(poses), 30, &base).unwrap();
        for (a, b) in skel.lengths.iter().zip(&base.lengths) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_reference_is_rejected() {
        let base = SkeletonModel::default();
        let poses = vec![[Vec3::zero(); NUM_JOINTS]; 5];
        assert!(matches!(reference_skeleton(&seq_from(poses), 5, &base), Err(SkeletonError::DegenerateSkeleton { .. })));
    }

    #[test]
    fn config_parses_and_mirrors_limits() {
        let cfg = SkeletonConfig::from_toml(
            "knee = [5.0, 140.0]\nhip = [[-10.0, 50.0], [-20.0, 30.0], [-120.0, 40.0]]\n[weights]\nnose = 0.5\n",
        )
        .unwrap();
        let m = cfg.build(None).unwrap();
        assert_eq!(m.limits.theta[coord::L_KNEE], Range::new(5.0, 140.0));
        assert_eq!(m.limits.theta[coord::R_HIP], Range::new(-50.0, 10.0));
        assert_eq!(m.limits.theta[coord::R_HIP + 2], Range::new(-120.0, 40.0));
        assert_eq!(m.weights[Nose.index()], 0.5);
        assert_eq!(m.weights[LWrist.index()], 3.0);
        assert!(SkeletonConfig::from_toml("knee = [10.0, 5.0]").unwrap().build(None).is_err());
        assert!(SkeletonConfig::from_toml("bogus = 1").is_err());
    }
}
