//! Smoothed temporal derivatives of metric series.

use crate::savgol::{SavGolError, SavitzkyGolay};
use crate::scalar::Real;

pub const DERIVATIVE_WINDOW: usize = 15;
pub const DERIVATIVE_ORDER: usize = 3;

/// Central differences (one-sided at the two ends) scaled to units per
/// second, then Savitzky-Golay smoothing.
pub fn temporal_derivative<T: Real>(values: &[T], fps: T) -> Result<Vec<T>, SavGolError> {
    let n = values.len();
    if n < DERIVATIVE_WINDOW {
        return Err(SavGolError::TooShort { len: n, window: DERIVATIVE_WINDOW });
    }
    let half = T::lit(0.5);
    let raw: Vec<T> = (0..n)
        .map(|t| match t {
            0 => (values[1] - values[0]) * fps,
            t if t == n - 1 => (values[t] - values[t - 1]) * fps,
            t => (values[t + 1] - values[t - 1]) * half * fps,
        })
        .collect();
    SavitzkyGolay::new(DERIVATIVE_WINDOW, DERIVATIVE_ORDER)?.apply(&raw)
}

/// Removes ±360° jumps so that wrapped angles differentiate cleanly.
pub fn unwrap_degrees<T: Real>(values: &[T]) -> Vec<T> {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    let mut out = Vec::with_capacity(values.len());
    let mut offset = T::zero();
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            let d = v + offset - out[i - 1];
            if d > half {
                offset = offset - full;
            } else if d < -half {
                offset = offset + full;
            }
        }
        out.push(v + offset);
    }
    out
}
