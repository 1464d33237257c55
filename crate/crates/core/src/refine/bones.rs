//! Bone-length enforcement by forward projection along the tree.

use super::skeleton::{in_subtree, SkeletonModel, EDGES, MIN_BONE_LENGTH, NUM_EDGES};
use crate::geom::Vec3;
use crate::pose::{JointId, PoseSequence, NUM_JOINTS};

/// Options for [`enforce_bone_lengths`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoneOptions {
    pub passes: usize,
    /// Added to the bone norm before normalizing.
    pub epsilon: f64,
}

impl Default for BoneOptions {
    fn default() -> Self {
        Self { passes: 3, epsilon: 0.0 }
    }
}

/// Per-call diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoneReport {
    /// Bones that collapsed below the minimum length and reused a fallback direction.
    pub degenerate_bones: usize,
}

/// Projects one frame in place. Each child is placed at the corrected parent
/// plus the bone length along the direction to the child's current
/// position, and its subtree is carried along by the same displacement.
/// `prev_dirs` holds the last good direction of each bone and is updated.
pub fn project_frame(pos: &mut [Vec3; NUM_JOINTS], skel: &SkeletonModel, prev_dirs: &mut [Vec3; NUM_EDGES], opts: &BoneOptions) -> usize {
    let mut degenerate = 0;
    for pass in 0..opts.passes {
        for (e, &(p, c)) in EDGES.iter().enumerate() {
            let d = pos[c.index()] - pos[p.index()];
            let n = d.norm();
            let dir = if n < MIN_BONE_LENGTH {
                if pass == 0 {
                    degenerate += 1;
                }
                prev_dirs[e]
            } else {
                d / (n + opts.epsilon)
            };
            prev_dirs[e] = if n < MIN_BONE_LENGTH { dir } else { d / n };
            let shift = pos[p.index()] + dir * skel.lengths[e] - pos[c.index()];
            for j in JointId::ALL {
                if in_subtree(j, c) {
                    pos[j.index()] += shift;
                }
            }
        }
    }
    degenerate
}

/// Re-imposes the skeleton's bone lengths on every frame; the root stays put.
pub fn enforce_bone_lengths(seq: &PoseSequence, skel: &SkeletonModel, opts: &BoneOptions) -> (PoseSequence, BoneReport) {
    let mut dirs = skel.fallback_dirs;
    let mut report = BoneReport::default();
    let out: Vec<[Vec3; NUM_JOINTS]> = seq
        .frames()
        .iter()
        .map(|f| {
            let mut pos = f.positions();
            report.degenerate_bones += project_frame(&mut pos, skel, &mut dirs, opts);
            pos
        })
        .collect();
    (seq.with_positions(&out).expect("projection keeps positions finite"), report)
}
