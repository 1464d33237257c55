//! Temporal smoothing of joint trajectories.

use crate::geom::Vec3;
use crate::pose::{PoseSequence, NUM_JOINTS};
use crate::savgol::{SavGolError, SavitzkyGolay};

use super::skeleton::median;

pub const DEFAULT_WINDOW: usize = 15;
pub const DEFAULT_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub sequence: PoseSequence,
    /// False when the sequence was shorter than the window and passed through.
    pub applied: bool,
}

/// Savitzky-Golay filter on every joint coordinate. Sequences shorter than
/// the window are returned unchanged with a warning.
pub fn smooth_sequence(seq: &PoseSequence, window: usize, order: usize) -> Result<Smoothed, SavGolError> {
    let filter = SavitzkyGolay::<f64>::new(window, order)?;
    if seq.len() < window {
        log::warn!("sequence of {} frames is shorter than the smoothing window {window}; left unsmoothed", seq.len());
        return Ok(Smoothed { sequence: seq.clone(), applied: false });
    }
    let pos = seq.positions();
    let mut out = pos.clone();
    for j in 0..NUM_JOINTS {
        for a in 0..3 {
            let track: Vec<f64> = pos.iter().map(|p| p[j][a]).collect();
            for (o, v) in out.iter_mut().zip(filter.apply(&track)?) {
                o[j][a] = v;
            }
        }
    }
    Ok(Smoothed { sequence: seq.with_positions(&out).expect("smoothing keeps positions finite"), applied: true })
}

/// Hampel filter on each joint's 3-D position: a sample whose distance from
/// the windowed coordinate-wise median exceeds both `k` scaled MADs of those
/// distances and `floor` (ft) is replaced by the median. Windows shrink
/// symmetrically near the ends. Returns the number of replacements.
pub fn despike(positions: &mut [[Vec3; NUM_JOINTS]], half_window: usize, k: f64, floor: f64) -> usize {
    let n = positions.len();
    if n < 3 || half_window == 0 {
        return 0;
    }
    let orig = positions.to_vec();
    let mut replaced = 0;
    for j in 0..NUM_JOINTS {
        for t in 1..n - 1 {
            let h = half_window.min(t).min(n - 1 - t);
            let (lo, hi) = (t - h, t + h + 1);
            let mut m = Vec3::zero();
            for a in 0..3 {
                let mut v: Vec<f64> = orig[lo..hi].iter().map(|p| p[j][a]).collect();
                m[a] = median(&mut v);
            }
            let mut dist: Vec<f64> = orig[lo..hi].iter().map(|p| (p[j] - m).norm()).collect();
            let mad = 1.4826 * median(&mut dist);
            if (orig[t][j] - m).norm() > (k * mad).max(floor) {
                positions[t][j] = m;
                replaced += 1;
            }
        }
    }
    replaced
}
