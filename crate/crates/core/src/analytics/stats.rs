//! Ranking and agreement statistics.

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::scalar::Real;

/// Mann-Whitney AUC: probability that a positive outscores a negative,
/// ties counted one half.
pub fn auc<T: Real>(scores: &[T], labels: &[bool]) -> Result<f64, AnalyticsError> {
    if scores.len() != labels.len() {
        return Err(AnalyticsError::Shape(format!("{} scores vs {} labels", scores.len(), labels.len())));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(AnalyticsError::SingleClass);
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(std::cmp::Ordering::Equal));
    // average ranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        rank_sum_pos += avg * idx[i..j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

pub fn mean<T: Real>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

/// Sample variance (n - 1 denominator).
fn sample_var<T: Real>(v: &[T]) -> T {
    let m = mean(v);
    v.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_usize_lossy(v.len() - 1)
}

/// Standardized mean difference with the pooled (n - 1 weighted) std.
pub fn cohens_d<T: Real>(a: &[T], b: &[T]) -> Result<T, AnalyticsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalyticsError::TooFewSamples { need: 2, got: a.len().min(b.len()) });
    }
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let pooled = ((na - T::one()) * sample_var(a) + (nb - T::one()) * sample_var(b)) / (na + nb - T::lit(2.0));
    if pooled <= T::zero() {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub const MAE_THRESHOLD_DEG: f64 = 1.0;
pub const MAE_THRESHOLD_FT: f64 = 0.1;
pub const MIN_PEARSON_R: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationStats {
    pub n: usize,
    pub mae: f64,
    pub max_error: f64,
    /// `None` when either side is constant.
    pub r: Option<f64>,
    pub validated: bool,
}

/// MAE, max error and Pearson r between paired values. A metric is validated
/// when MAE is below 1 (degrees) or 0.1 (feet, positional metrics) and r > 0.95.
pub fn validation_stats<T: Real>(predicted: &[T], reference: &[T], positional: bool) -> Result<ValidationStats, AnalyticsError> {
    if predicted.len() != reference.len() {
        return Err(AnalyticsError::Shape(format!("{} predicted vs {} reference", predicted.len(), reference.len())));
    }
    if predicted.len() < 2 {
        return Err(AnalyticsError::NoPairs);
    }
    let err: Vec<f64> = predicted
        .iter()
        .zip(reference)
        .map(|(&p, &r)| (p - r).abs().to_f64().unwrap_or(f64::NAN))
        .collect();
    let mae = mean(&err);
    let max_error = err.iter().copied().fold(0.0, f64::max);
    let r = pearson(predicted, reference).and_then(|r| r.to_f64());
    let limit = if positional { MAE_THRESHOLD_FT } else { MAE_THRESHOLD_DEG };
    let validated = mae < limit && r.is_some_and(|r| r > MIN_PEARSON_R);
    Ok(ValidationStats { n: err.len(), mae, max_error, r, validated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
        assert_eq!(auc(&[1.0, 2.0, 3.0], &[false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&[3.0, 2.0, 1.0], &[false, true, true]).unwrap(), 0.0);
        assert_eq!(auc(&[1.0, 1.0], &[false, true]).unwrap(), 0.5);
        assert!(matches!(auc(&[1.0, 2.0], &[true, true]), Err(AnalyticsError::SingleClass)));
        assert_eq!(auc(&[0.1f32, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
    }

    #[test]
    fn cohens_d_examples() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap(), -2.0);
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(matches!(cohens_d(&[1.0, 1.0], &[2.0, 2.0]), Err(AnalyticsError::ZeroVariance)));
        assert!(cohens_d(&[1.0], &[2.0, 3.0]).is_err());
    }

    #[test]
    fn validation_examples() {
        let r = [10.0, 20.0, 35.0, 41.0];
        let s = validation_stats(&r, &r, false).unwrap();
        assert_eq!((s.mae, s.max_error, s.validated), (0.0, 0.0, true));
        assert!((s.r.unwrap() - 1.0).abs() < 1e-12);

        let p: Vec<f64> = r.iter().map(|v| v + 0.5).collect();
        let s = validation_stats(&p, &r, false).unwrap();
        assert!((s.mae - 0.5).abs() < 1e-12 && (s.max_error - 0.5).abs() < 1e-12 && s.validated);

        let p: Vec<f64> = r.iter().map(|v| v + 2.0).collect();
        assert!(!validation_stats(&p, &r, false).unwrap().validated);
        // 0.05 ft is under the positional threshold
        let p: Vec<f64> = r.iter().map(|v| v + 0.05).collect();
        assert!(validation_stats(&p, &r, true).unwrap().validated);

        let s = validation_stats(&[1.0, 1.0], &[1.0, 1.0], false).unwrap();
        assert!(s.r.is_none() && !s.validated);
        assert!(matches!(validation_stats(&[1.0], &[1.0], false), Err(AnalyticsError::NoPairs)));
    }
}
