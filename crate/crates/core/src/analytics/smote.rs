//! Synthetic minority oversampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AnalyticsError;

pub const DEFAULT_K: usize = 5;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Appends synthetic minority samples until both classes have equal counts.
/// Originals come first, unchanged and in input order.
pub fn smote_oversample(x: &[Vec<f64>], y: &[bool], k: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<bool>), AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::Shape(format!("{} rows vs {} labels", x.len(), y.len())));
    }
    if k == 0 {
        return Err(AnalyticsError::Config("smote k must be >= 1".into()));
    }
    let n_pos = y.iter().filter(|&&l| l).count();
    let n_neg = y.len() - n_pos;
    let mut xo = x.to_vec();
    let mut yo = y.to_vec();
    if n_pos == n_neg {
        return Ok((xo, yo));
    }
    let minority_label = n_pos < n_neg;
    let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == minority_label).collect();
    if minority.len() < 2 {
        return Err(AnalyticsError::TooFewMinority(minority.len()));
    }
    let kk = k.min(minority.len() - 1);
    let neighbours: Vec<Vec<usize>> = minority
        .iter()
        .map(|&i| {
            let mut others: Vec<usize> = minority.iter().copied().filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist2(&x[i], &x[a]).total_cmp(&dist2(&x[i], &x[b])).then(a.cmp(&b)));
            others.truncate(kk);
            others
        })
        .collect();
    let need = n_pos.abs_diff(n_neg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..need {
        // cycle through minority points so every one seeds synthetics
        let m = s % minority.len();
        let a = &x[minority[m]];
        let b = &x[neighbours[m][rng.random_range(0..kk)]];
        let gap: f64 = rng.random();
        xo.push(a.iter().zip(b).map(|(p, q)| p + gap * (q - p)).collect());
        yo.push(minority_label);
    }
    Ok((xo, yo))
}
