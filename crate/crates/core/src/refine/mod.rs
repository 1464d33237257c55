//! Biomechanical refinement: bone lengths, inverse kinematics with joint
//! limits, temporal smoothing and symmetry.

pub mod bones;
pub mod ik;
pub mod kinematics;
pub mod skeleton;
pub mod smooth;
pub mod symmetry;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::pose::{PoseSequence, Space, NUM_JOINTS};
use crate::savgol::SavGolError;

pub use bones::{enforce_bone_lengths, BoneOptions, BoneReport};
pub use ik::{ik_fit, IkError, IkOptions, IkResult};
pub use kinematics::{fk, JointAngles};
pub use skeleton::{reference_skeleton, SkeletonConfig, SkeletonError, SkeletonModel};
pub use smooth::{despike, smooth_sequence};
pub use symmetry::{enforce_symmetry, symmetric_skeleton};

#[derive(Debug, Error)]
pub enum RefineError {
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Smoothing(#[from] SavGolError),
    #[error("invalid refine config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    /// Frames used for the median reference skeleton.
    pub reference_frames: usize,
    pub bone_passes: usize,
    pub bone_epsilon: f64,
    /// Run the per-frame IK fit; when off the bone-projected positions pass
    /// straight through.
    pub use_ik: bool,
    pub ik: IkOptions,
    /// Hampel outlier replacement before smoothing.
    pub despike: bool,
    pub despike_half_window: usize,
    pub despike_k: f64,
    /// Deviations below this (ft) are never treated as outliers.
    pub despike_floor: f64,
    pub smoothing: bool,
    pub smooth_window: usize,
    pub smooth_order: usize,
    pub symmetry: bool,
    pub skeleton: SkeletonConfig,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            reference_frames: 30,
            bone_passes: 3,
            bone_epsilon: 0.0,
            use_ik: true,
            ik: IkOptions::default(),
            despike: false,
            despike_half_window: 3,
            despike_k: 3.0,
            despike_floor: 0.02,
            smoothing: true,
            smooth_window: smooth::DEFAULT_WINDOW,
            smooth_order: smooth::DEFAULT_ORDER,
            symmetry: true,
            skeleton: SkeletonConfig::default(),
        }
    }
}

impl RefineConfig {
    pub fn from_toml(text: &str) -> Result<Self, RefineError> {
        toml::from_str(text).map_err(|e| RefineError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub frames: usize,
    pub reference_lengths: Vec<f64>,
    pub final_lengths: Vec<f64>,
    pub degenerate_bones: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ik: Option<IkSummary>,
    pub outliers_replaced: usize,
    pub smoothed: bool,
    /// Largest bone-length error of the output (ft).
    pub max_length_deviation: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IkSummary {
    pub mean_residual: f64,
    pub max_residual: f64,
    pub non_converged: usize,
    pub max_iterations: usize,
    /// Largest joint-limit excess of the fitted angles (degrees).
    pub max_limit_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub sequence: PoseSequence,
    pub skeleton: SkeletonModel,
    /// Per-frame IK angles; empty when IK is disabled.
    pub angles: Vec<JointAngles>,
    pub report: RefineReport,
}

/// Runs the full refinement stack on a pose sequence. Pelvis-rooted input
/// yields pelvis-rooted output.
pub fn refine_pipeline(seq: &PoseSequence, cfg: &RefineConfig) -> Result<Refined, RefineError> {
    let rooted = seq.space() == Space::PelvisRooted;
    let work = seq.as_global();
    let base = cfg.skeleton.build(None)?;
    let n_ref = cfg.reference_frames.clamp(1, work.len());
    let skel = reference_skeleton(&work, n_ref, &base)?;
    let mut report = RefineReport { frames: work.len(), reference_lengths: skel.lengths.to_vec(), ..Default::default() };

    let bone_opts = BoneOptions { passes: cfg.bone_passes, epsilon: cfg.bone_epsilon };
    let (projected, br) = enforce_bone_lengths(&work, &skel, &bone_opts);
    report.degenerate_bones = br.degenerate_bones;

    let targets = projected.positions();
    let (mut fitted, angles) = if cfg.use_ik {
        let fits: Vec<IkResult> = targets.par_iter().map(|t| ik_fit(t, &skel, None, &cfg.ik)).collect();
        let n = fits.len().max(1) as f64;
        let summary = IkSummary {
            mean_residual: fits.iter().map(IkResult::residual).sum::<f64>() / n,
            max_residual: fits.iter().map(IkResult::residual).fold(0.0, f64::max),
            non_converged: fits.iter().filter(|f| !f.converged).count(),
            max_iterations: fits.iter().map(|f| f.iterations).max().unwrap_or(0),
            max_limit_violation: fits.iter().map(|f| f.angles.limit_violation(&skel.limits)).fold(0.0, f64::max),
        };
        if summary.non_converged > 0 {
            log::warn!("IK kept the best iterate on {} of {} frames", summary.non_converged, fits.len());
        }
        report.ik = Some(summary);
        let fitted: Vec<[Vec3; NUM_JOINTS]> = fits.iter().map(|f| f.positions).collect();
        (fitted, fits.into_iter().map(|f| f.angles).collect())
    } else {
        (targets, Vec::new())
    };

    if cfg.despike {
        report.outliers_replaced = despike(&mut fitted, cfg.despike_half_window, cfg.despike_k, cfg.despike_floor);
    }
    let fitted_seq = work.with_positions(&fitted).expect("refined positions are finite");
    let smoothed_seq = if cfg.smoothing {
        let smoothed = smooth_sequence(&fitted_seq, cfg.smooth_window, cfg.smooth_order)?;
        report.smoothed = smoothed.applied;
        smoothed.sequence
    } else {
        fitted_seq
    };

    let (sym_seq, final_skel) = if cfg.symmetry {
        enforce_symmetry(&smoothed_seq, &skel)
    } else {
        (smoothed_seq, skel)
    };
    let (mut out, _) = enforce_bone_lengths(&sym_seq, &final_skel, &BoneOptions { passes: 1, epsilon: cfg.bone_epsilon });
    report.max_length_deviation = final_skel.max_length_deviation(&out.positions());
    report.final_lengths = final_skel.lengths.to_vec();
    if rooted {
        out = out.to_pelvis_rooted();
    }
    Ok(Refined { sequence: out, skeleton: final_skel, angles, report })
}
