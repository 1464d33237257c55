//! Left/right symmetry of bone lengths and pelvis placement.

use super::bones::{enforce_bone_lengths, BoneOptions};
use super::skeleton::{SkeletonModel, SYMMETRIC_PAIRS};
use crate::pose::{JointId, PoseSequence};

/// Skeleton with each left/right pair replaced by its mean length.
pub fn symmetric_skeleton(skel: &SkeletonModel) -> SkeletonModel {
    let mut lengths = skel.lengths;
    for (a, b) in SYMMETRIC_PAIRS {
        let m = 0.5 * (lengths[a] + lengths[b]);
        lengths[a] = m;
        lengths[b] = m;
    }
    skel.with_lengths(lengths)
}

/// Averages paired bone lengths, re-centres the pelvis between the hips and
/// re-projects every frame onto the symmetric skeleton.
pub fn enforce_symmetry(seq: &PoseSequence, skel: &SkeletonModel) -> (PoseSequence, SkeletonModel) {
    let sym = symmetric_skeleton(skel);
    let mut pos = seq.positions();
    for p in pos.iter_mut() {
        p[JointId::Pelvis.index()] = p[JointId::LHip.index()].midpoint(p[JointId::RHip.index()]);
    }
    let centred = seq.as_global().with_positions(&pos).expect("re-centring keeps positions finite");
    let (out, _) = enforce_bone_lengths(&centred, &sym, &BoneOptions::default());
    (out, sym)
}
