//! Noise injection: Gaussian jitter, per-frame bone-length jitter and
//! outlier joints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::geom::Vec3;
use crate::pose::{JointId, PoseSequence, Space, NUM_JOINTS};
use crate::refine::skeleton::EDGES;

/// Largest displacement of an outlier joint (ft).
pub const MAX_OUTLIER: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorruptConfig {
    /// Per-coordinate Gaussian standard deviation (ft).
    pub sigma: f64,
    /// Probability that a joint in a frame is displaced as an outlier.
    pub outlier_rate: f64,
    /// Bound on the multiplicative per-frame bone-length change.
    pub bone_jitter: f64,
    pub seed: u64,
}

/// Returns a corrupted copy; pelvis-rooted input stays pelvis-rooted.
pub fn corrupt(seq: &PoseSequence, cfg: &CorruptConfig) -> PoseSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.sigma.max(0.0)).expect("finite sigma");
    let out: Vec<[Vec3; NUM_JOINTS]> = seq
        .frames()
        .iter()
        .map(|f| {
            let old = f.positions();
            let mut p = old;
            if cfg.bone_jitter > 0.0 {
                // edges are topologically ordered, so parents are final first
                for (pa, ch) in EDGES {
                    let k = 1.0 + rng.random_range(-cfg.bone_jitter..=cfg.bone_jitter);
                    p[ch.index()] = p[pa.index()] + (old[ch.index()] - old[pa.index()]) * k;
                }
            }
            if cfg.sigma > 0.0 {
                for q in p.iter_mut() {
                    *q += Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
                }
            }
            if cfg.outlier_rate > 0.0 {
                for q in p.iter_mut() {
                    if rng.random::<f64>() < cfg.outlier_rate {
                        let d: [f64; 3] = UnitSphere.sample(&mut rng);
                        *q += Vec3::from(d) * rng.random_range(0.0..=MAX_OUTLIER);
                    }
                }
            }
            if seq.space() == Space::PelvisRooted {
                let c = p[JointId::Pelvis.index()];
                p = p.map(|q| q - c);
            }
            p
        })
        .collect();
    seq.with_positions(&out).expect("corruption keeps positions finite")
}
