//! Synthetic pitcher cohorts with a planted injury signal.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ingest::{workload_names, PitcherMeta};
use crate::metrics::registry::{Event, MetricName};
use crate::metrics::EventTable;

/// Population mean, between-pitcher std and within-pitcher std per metric.
const NORMS: [(f64, f64, f64); 18] = [
    (40.0, 8.0, 3.0),
    (35.0, 8.0, 3.0),
    (5.0, 4.0, 1.5),
    (-10.0, 5.0, 2.0),
    (8.0, 4.0, 1.5),
    (15.0, 5.0, 2.0),
    (95.0, 10.0, 4.0),
    (70.0, 10.0, 4.0),
    (90.0, 8.0, 3.0),
    (80.0, 10.0, 4.0),
    (-20.0, 10.0, 4.0),
    (10.0, 10.0, 4.0),
    (-35.0, 10.0, 4.0),
    (30.0, 8.0, 3.0),
    (20.0, 8.0, 3.0),
    (2.5, 0.4, 0.15),
    (0.2, 0.15, 0.05),
    (3.6, 0.3, 0.08),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub pitchers: usize,
    pub pitches_per_pitcher: usize,
    pub positive_rate: f64,
    /// Metric whose pitcher-level mean drives the label.
    pub planted: MetricName,
    /// Label score = effect · z(planted mean) + N(0, 1).
    pub effect: f64,
    /// Chance that a workload entry is absent.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            pitchers: 200,
            pitches_per_pitcher: 8,
            positive_rate: 0.1,
            planted: MetricName::ShoulderAbductionThrow,
            effect: 3.0,
            missing_rate: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub metas: Vec<PitcherMeta>,
    /// Per-pitch event tables keyed by pitcher id.
    pub tables: BTreeMap<String, Vec<EventTable>>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// The `k` highest scores become positives.
fn top_k(scores: &[f64], k: usize) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut y = vec![false; scores.len()];
    for &i in &idx[..k.min(scores.len())] {
        y[i] = true;
    }
    y
}

pub fn cohort(cfg: &CohortConfig) -> Cohort {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut latent = Vec::with_capacity(cfg.pitchers);
    let mut tables = BTreeMap::new();
    let mut metas = Vec::with_capacity(cfg.pitchers);
    for i in 0..cfg.pitchers {
        let id = format!("P{:04}", i + 1);
        let mu: Vec<f64> = NORMS.iter().map(|(m, b, _)| m + b * normal(&mut rng)).collect();
        latent.push((mu[cfg.planted.index()] - NORMS[cfg.planted.index()].0) / NORMS[cfg.planted.index()].1);
        let pitches: Vec<EventTable> = (0..cfg.pitches_per_pitcher)
            .map(|_| EventTable {
                values: (0..18)
                    .map(|m| {
                        let w = NORMS[m].2;
                        Event::ALL.map(|_| mu[m] + w * normal(&mut rng))
                    })
                    .collect(),
            })
            .collect();
        tables.insert(id.clone(), pitches);
        let workload = workload_names()
            .into_iter()
            .map(|w| {
                let v = 100.0 + 20.0 * normal(&mut rng);
                (w, if rng.random::<f64>() < cfg.missing_rate { None } else { Some(v) })
            })
            .collect();
        metas.push(PitcherMeta {
            pitcher_id: id,
            age: rng.random_range(19.0..36.0),
            prior_tj: rng.random::<f64>() < 0.05,
            prior_injuries: rng.random_range(0..4),
            il_years: rng.random_range(0..3),
            workload,
            n_pitches: cfg.pitches_per_pitcher as u32,
            label_tj: false,
            label_arm_injury: false,
        });
    }
    let scores: Vec<f64> = latent.iter().map(|z| cfg.effect * z + normal(&mut rng)).collect();
    let k = (cfg.positive_rate * cfg.pitchers as f64).round() as usize;
    for (m, y) in metas.iter_mut().zip(top_k(&scores, k)) {
        m.label_tj = y;
        m.label_arm_injury = y || rng.random::<f64>() < 0.1;
    }
    Cohort { metas, tables }
}

/// Standard-normal design matrix whose labels depend on column `planted`
/// only; exactly `round(rate · n)` positives.
pub fn planted_matrix(n: usize, d: usize, rate: f64, planted: usize, effect: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal(&mut rng)).collect()).collect();
    let scores: Vec<f64> = x.iter().map(|r| effect * r[planted] + normal(&mut rng)).collect();
    let y = top_k(&scores, (rate * n as f64).round() as usize);
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohort_shape_and_rate() {
        let c = cohort(&CohortConfig::default());
        assert_eq!(c.metas.len(), 200);
        assert_eq!(c.tables.len(), 200);
        assert_eq!(c.metas.iter().filter(|m| m.label_tj).count(), 20);
        assert!(c.tables.values().all(|t| t.len() == 8));
        assert_eq!(cohort(&CohortConfig::default()), c);
    }

    #[test]
    fn planted_matrix_counts() {
        let (x, y) = planted_matrix(200, 30, 0.1, 7, 2.5, 1);
        assert_eq!(x.len(), 200);
        assert_eq!(y.iter().filter(|&&l| l).count(), 20);
    }
}
