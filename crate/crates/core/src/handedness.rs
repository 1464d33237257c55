//! Throwing-side classification and limb role assignment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{normalize_degrees, signed_horizontal_angle, GeomError};
use crate::pose::{JointId, PoseSequence};

use JointId::*;

/// Right-hander band for the mean hip-line angle (degrees); left-handers
/// use the mirror image.
pub const RHP_PELVIS_BAND: (f64, f64) = (-108.0, -76.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Right,
    Left,
}

impl Handedness {
    /// +1 for right-handers, −1 for left-handers.
    pub fn sign(self) -> f64 {
        match self {
            Handedness::Right => 1.0,
            Handedness::Left => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Handedness::Right => Handedness::Left,
            Handedness::Left => Handedness::Right,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Handedness::Right => "right",
            Handedness::Left => "left",
        }
    }
}

impl std::str::FromStr for Handedness {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "right" | "r" | "rhp" => Ok(Handedness::Right),
            "left" | "l" | "lhp" => Ok(Handedness::Left),
            other => Err(format!("unknown handedness {other:?} (expected right|left)")),
        }
    }
}

impl std::fmt::Display for Handedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandednessResult {
    pub side: Handedness,
    /// Mean of (right ankle height − left ankle height), ft.
    pub delta_ankle: f64,
    /// Circular mean of the hip-line angle, degrees.
    pub pelvis_angle: f64,
    pub agree: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HandednessError {
    #[error("handedness signals disagree (delta_ankle = {delta_ankle:.4} ft, pelvis angle = {pelvis_angle:.2} deg)")]
    Disagreement { delta_ankle: f64, pelvis_angle: f64 },
    #[error("hips coincide at frame {frame}")]
    DegenerateVector { frame: usize },
    #[error("need at least 2 frames, got {0}")]
    TooShort(usize),
}

/// Both raw signals without the agreement decision.
pub fn handedness_signals(seq: &PoseSequence) -> Result<(f64, f64), HandednessError> {
    if seq.len() < 2 {
        return Err(HandednessError::TooShort(seq.len()));
    }
    let n = seq.len() as f64;
    let mut delta = 0.0;
    let (mut s, mut c) = (0.0, 0.0);
    for (t, f) in seq.frames().iter().enumerate() {
        delta += f.pos(RAnkle).z - f.pos(LAnkle).z;
        let phi = signed_horizontal_angle(f.pos(LHip) - f.pos(RHip))
            .map_err(|_: GeomError| HandednessError::DegenerateVector { frame: t })?;
        let a = normalize_degrees(phi - 90.0).to_radians();
        s += a.sin();
        c += a.cos();
    }
    Ok((delta / n, normalize_degrees(s.atan2(c).to_degrees())))
}

pub fn classify_handedness(seq: &PoseSequence) -> Result<HandednessResult, HandednessError> {
    let (delta_ankle, pelvis_angle) = handedness_signals(seq)?;
    let (lo, hi) = RHP_PELVIS_BAND;
    let side = if delta_ankle < 0.0 && (lo..=hi).contains(&pelvis_angle) {
        Handedness::Right
    } else if delta_ankle > 0.0 && (-hi..=-lo).contains(&pelvis_angle) {
        Handedness::Left
    } else {
        return Err(HandednessError::Disagreement { delta_ankle, pelvis_angle });
    };
    Ok(HandednessResult { side, delta_ankle, pelvis_angle, agree: true })
}

/// Proximal, middle and distal joint of a limb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limb {
    pub root: JointId,
    pub mid: JointId,
    pub end: JointId,
}

pub const LEFT_ARM: Limb = Limb { root: LShoulder, mid: LElbow, end: LWrist };
pub const RIGHT_ARM: Limb = Limb { root: RShoulder, mid: RElbow, end: RWrist };
pub const LEFT_LEG: Limb = Limb { root: LHip, mid: LKnee, end: LAnkle };
pub const RIGHT_LEG: Limb = Limb { root: RHip, mid: RKnee, end: RAnkle };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub side: Handedness,
    pub throw_arm: Limb,
    pub glove_arm: Limb,
    pub lead_leg: Limb,
    pub trail_leg: Limb,
}

pub fn assign_roles(side: Handedness) -> Roles {
    match side {
        Handedness::Right => Roles { side, throw_arm: RIGHT_ARM, glove_arm: LEFT_ARM, lead_leg: LEFT_LEG, trail_leg: RIGHT_LEG },
        Handedness::Left => Roles { side, throw_arm: LEFT_ARM, glove_arm: RIGHT_ARM, lead_leg: RIGHT_LEG, trail_leg: LEFT_LEG },
    }
}
