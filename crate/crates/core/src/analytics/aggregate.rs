//! Per-pitcher feature aggregation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::ingest::{workload_names, PitchSample, PitcherMeta};
use crate::metrics::registry::{Event, MetricName};
use crate::metrics::EventTable;

pub const STAT_NAMES: [&str; 5] = ["mean", "std", "p90", "range", "cv"];
pub const NUM_KINEMATIC_STATS: usize = 90;
/// Below this |mean| the coefficient of variation is reported as 0.
pub const CV_MEAN_GUARD: f64 = 1e-9;

const DEFAULT_REGISTRY: &str = include_str!("../../config/features.toml");

/// Ordered feature names plus the metric-to-event designation table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRegistry {
    pub features: Vec<String>,
    pub designation: BTreeMap<MetricName, Event>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    features: Vec<String>,
    #[serde(default)]
    designation: BTreeMap<String, String>,
}

impl FeatureRegistry {
    pub fn from_toml(s: &str) -> Result<Self, AnalyticsError> {
        let file: RegistryFile = toml::from_str(s).map_err(|e| AnalyticsError::Config(e.to_string()))?;
        let mut designation: BTreeMap<MetricName, Event> = MetricName::ALL.iter().map(|m| (*m, m.default_event())).collect();
        for (m, e) in &file.designation {
            let m: MetricName = m.parse().map_err(AnalyticsError::Config)?;
            let e: Event = e.parse().map_err(AnalyticsError::Config)?;
            designation.insert(m, e);
        }
        let reg = FeatureRegistry { features: file.features, designation };
        let pool = reg.slot_names();
        let mut seen = std::collections::HashSet::new();
        for f in &reg.features {
            if !pool.contains(f) {
                return Err(AnalyticsError::UnknownFeature(f.clone()));
            }
            if !seen.insert(f) {
                return Err(AnalyticsError::Config(format!("duplicate feature {f:?}")));
            }
        }
        Ok(reg)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }

    pub fn kinematic_names(&self) -> Vec<String> {
        MetricName::ALL
            .iter()
            .flat_map(|m| STAT_NAMES.iter().map(move |s| stat_name(*m, s, self.designation[m])))
            .collect()
    }

    /// Every slot a registry may select from, in raw order.
    pub fn slot_names(&self) -> Vec<String> {
        let mut v = self.kinematic_names();
        v.extend(["n_pitches", "age", "prior_tj", "prior_injuries", "il_years"].map(String::from));
        v.extend(workload_names());
        v
    }
}

impl Default for FeatureRegistry {
    fn default() -> Self {
        FeatureRegistry::from_toml(DEFAULT_REGISTRY).expect("bundled registry parses")
    }
}

pub fn stat_name(m: MetricName, stat: &str, e: Event) -> String {
    format!("{}_{}_{}", m.name(), stat, e.short())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitcherProfile {
    pub meta: PitcherMeta,
    pub kinematic_stats: Vec<NamedValue>,
    /// Registry-ordered features; absent workload slots are NaN until
    /// [`impute_median`] fills them.
    pub feature_vector: Vec<f64>,
    pub absent: Vec<usize>,
}

/// Nearest-rank P90: sorted value at zero-based index ceil(0.9 n), clamped.
pub fn p90_nearest_rank(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let k = (9 * n).div_ceil(10).min(n - 1);
    sorted[k]
}

/// mean, population std, P90, range, cv.
pub fn summary(values: &[f64]) -> [f64; 5] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[sorted.len() - 1] - sorted[0];
    let cv = if mean.abs() < CV_MEAN_GUARD { 0.0 } else { std / mean.abs() };
    [mean, std, p90_nearest_rank(&sorted), range, cv]
}

pub fn aggregate_pitcher(tables: &[EventTable], meta: &PitcherMeta, reg: &FeatureRegistry) -> Result<PitcherProfile, AnalyticsError> {
    if tables.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut kinematic_stats = Vec::with_capacity(NUM_KINEMATIC_STATS);
    for m in MetricName::ALL {
        let e = reg.designation[&m];
        let values: Vec<f64> = tables.iter().map(|t| t.get(m, e)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AnalyticsError::MissingMetric { pitcher: meta.pitcher_id.clone(), metric: m.name().into(), event: e.name().into() });
        }
        for (s, v) in STAT_NAMES.iter().zip(summary(&values)) {
            kinematic_stats.push(NamedValue { name: stat_name(m, s, e), value: v });
        }
    }
    let mut slots: BTreeMap<String, f64> = kinematic_stats.iter().map(|s| (s.name.clone(), s.value)).collect();
    slots.insert("n_pitches".into(), meta.n_pitches as f64);
    slots.insert("age".into(), meta.age);
    slots.insert("prior_tj".into(), if meta.prior_tj { 1.0 } else { 0.0 });
    slots.insert("prior_injuries".into(), meta.prior_injuries as f64);
    slots.insert("il_years".into(), meta.il_years as f64);
    for w in workload_names() {
        slots.insert(w.clone(), meta.workload.get(&w).copied().flatten().unwrap_or(f64::NAN));
    }
    let mut feature_vector = Vec::with_capacity(reg.len());
    let mut absent = Vec::new();
    for (i, f) in reg.features.iter().enumerate() {
        let v = *slots.get(f).ok_or_else(|| AnalyticsError::UnknownFeature(f.clone()))?;
        if v.is_nan() {
            absent.push(i);
        }
        feature_vector.push(v);
    }
    Ok(PitcherProfile { meta: meta.clone(), kinematic_stats, feature_vector, absent })
}

/// Replaces absent slots with the median of the present values in that
/// column (0 when no pitcher has it).
pub fn impute_median(profiles: &mut [PitcherProfile]) {
    let Some(width) = profiles.first().map(|p| p.feature_vector.len()) else { return };
    for j in 0..width {
        let mut present: Vec<f64> = profiles.iter().map(|p| p.feature_vector[j]).filter(|v| !v.is_nan()).collect();
        present.sort_by(f64::total_cmp);
        let med = match present.len() {
            0 => 0.0,
            n if n % 2 == 1 => present[n / 2],
            n => 0.5 * (present[n / 2 - 1] + present[n / 2]),
        };
        for p in profiles.iter_mut() {
            if p.feature_vector[j].is_nan() {
                p.feature_vector[j] = med;
            }
        }
    }
}

/// Groups measured samples into per-pitch event tables keyed by pitcher.
/// Entries not present in the samples are NaN.
pub fn tables_from_samples(samples: &[PitchSample]) -> BTreeMap<String, Vec<EventTable>> {
    let mut by_pitch: BTreeMap<(String, String), EventTable> = BTreeMap::new();
    for s in samples {
        let t = by_pitch
            .entry((s.pitcher_id.clone(), s.record.pitch_id.clone()))
            .or_insert_with(|| EventTable { values: vec![[f64::NAN; 3]; MetricName::ALL.len()] });
        let k = Event::ALL.iter().position(|e| *e == s.record.event).expect("event in ALL");
        t.values[s.record.metric.index()][k] = s.record.value;
    }
    let mut out: BTreeMap<String, Vec<EventTable>> = BTreeMap::new();
    for ((pitcher, _), t) in by_pitch {
        out.entry(pitcher).or_default().push(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str) -> PitcherMeta {
        PitcherMeta {
            pitcher_id: id.into(),
            age: 24.0,
            prior_tj: false,
            prior_injuries: 1,
            il_years: 0,
            workload: workload_names().into_iter().map(|w| (w, Some(1.0))).collect(),
            n_pitches: 3,
            label_tj: false,
            label_arm_injury: false,
        }
    }

    fn table(v: f64) -> EventTable {
        EventTable { values: vec![[v; 3]; 18] }
    }

    #[test]
    fn registry_has_114_slots() {
        let reg = FeatureRegistry::default();
        assert_eq!(reg.len(), 114);
        assert_eq!(reg.slot_names().len(), 119);
        assert_eq!(reg.position("hip_shoulder_separation_p90_fp"), Some(12 * 5 + 2));
        assert!(matches!(FeatureRegistry::from_toml("features = [\"nope\"]"), Err(AnalyticsError::UnknownFeature(_))));
    }

    #[test]
    fn ten_value_example() {
        let v: Vec<f64> = (0..10).map(|i| 40.0 + 2.0 * i as f64).collect();
        let [mean, _, p90, range, _] = summary(&v);
        assert_eq!((mean, p90, range), (49.0, 58.0, 18.0));
    }

    #[test]
    fn single_pitch_and_zero_mean() {
        let [mean, std, p90, range, cv] = summary(&[7.5]);
        assert_eq!((mean, std, p90, range, cv), (7.5, 0.0, 7.5, 0.0, 0.0));
        let s = summary(&[-1.0, 1.0]);
        assert_eq!(s[4], 0.0);
        assert_eq!(s[1], 1.0);
    }

    #[test]
    fn profile_layout_and_imputation() {
        let reg = FeatureRegistry::default();
        let mut a = meta("a");
        a.workload.insert("w02".into(), None);
        let mut b = meta("b");
        b.workload.insert("w02".into(), Some(5.0));
        let c = {
            let mut c = meta("c");
            c.workload.insert("w02".into(), Some(9.0));
            c
        };
        let mut ps: Vec<_> = [a, b, c].iter().map(|m| aggregate_pitcher(&[table(2.0), table(4.0)], m, &reg).unwrap()).collect();
        assert_eq!(ps[0].kinematic_stats.len(), NUM_KINEMATIC_STATS);
        assert_eq!(ps[0].feature_vector.len(), 114);
        let w02 = reg.position("w02").unwrap();
        assert_eq!(ps[0].absent, vec![w02]);
        impute_median(&mut ps);
        assert_eq!(ps[0].feature_vector[w02], 7.0);
        assert_eq!(ps[0].feature_vector[0], 3.0);
        assert!(aggregate_pitcher(&[], &meta("x"), &reg).is_err());
    }
}
