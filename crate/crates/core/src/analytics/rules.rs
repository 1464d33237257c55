//! Static threshold rules on pitcher-level features.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::aggregate::{FeatureRegistry, PitcherProfile};
use super::AnalyticsError;

const DEFAULT_RULES: &str = include_str!("../../config/rules.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Comparator::Gt => a > b,
            Comparator::Ge => a >= b,
            Comparator::Lt => a < b,
            Comparator::Le => a <= b,
        }
    }
}

/// `feature comparator threshold`, e.g. `trunk_lateral_tilt_p90_br > 40`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub feature: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature, self.comparator.symbol(), self.threshold)
    }
}

impl FromStr for Rule {
    type Err = AnalyticsError;
    fn from_str(s: &str) -> Result<Self, AnalyticsError> {
        let bad = || AnalyticsError::Config(format!("bad rule {s:?}"));
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [feature, op, thr] = parts[..] else { return Err(bad()) };
        let comparator = match op {
            ">" => Comparator::Gt,
            ">=" => Comparator::Ge,
            "<" => Comparator::Lt,
            "<=" => Comparator::Le,
            _ => return Err(bad()),
        };
        let threshold = thr.parse::<f64>().map_err(|_| bad())?;
        Ok(Rule { feature: feature.into(), comparator, threshold })
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn from_toml(s: &str) -> Result<Self, AnalyticsError> {
        toml::from_str(s).map_err(|e| AnalyticsError::Config(e.to_string()))
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::from_toml(DEFAULT_RULES).expect("bundled rules parse")
    }
}

/// Rules that fire for the profile, in rule order.
pub fn static_flags(profile: &PitcherProfile, reg: &FeatureRegistry, rules: &[Rule]) -> Result<Vec<String>, AnalyticsError> {
    let mut out = Vec::new();
    for r in rules {
        let i = reg.position(&r.feature).ok_or_else(|| AnalyticsError::UnknownFeature(r.feature.clone()))?;
        if r.comparator.holds(profile.feature_vector[i], r.threshold) {
            out.push(r.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PitcherMeta;

    fn profile(reg: &FeatureRegistry, values: &[(&str, f64)]) -> PitcherProfile {
        let mut fv = vec![0.0; reg.len()];
        for (k, v) in values {
            fv[reg.position(k).unwrap()] = *v;
        }
        let meta = PitcherMeta {
            pitcher_id: "p".into(),
            age: 20.0,
            prior_tj: false,
            prior_injuries: 0,
            il_years: 0,
            workload: Default::default(),
            n_pitches: 1,
            label_tj: false,
            label_arm_injury: false,
        };
        PitcherProfile { meta, kinematic_stats: vec![], feature_vector: fv, absent: vec![] }
    }

    #[test]
    fn single_rule_and_empty_set() {
        let reg = FeatureRegistry::default();
        let p = profile(&reg, &[("hip_shoulder_separation_p90_fp", 65.0)]);
        let r: Rule = "hip_shoulder_separation_p90_fp > 60".parse().unwrap();
        assert_eq!(static_flags(&p, &reg, &[r.clone()]).unwrap(), vec![r.to_string()]);
        assert!(static_flags(&p, &reg, &[]).unwrap().is_empty());
        let unknown: Rule = "foo > 1".parse().unwrap();
        assert!(matches!(static_flags(&p, &reg, &[unknown]), Err(AnalyticsError::UnknownFeature(_))));
        assert!("a >> 1".parse::<Rule>().is_err());
    }

    #[test]
    fn three_of_five_defaults() {
        let reg = FeatureRegistry::default();
        let rules = RuleSet::default().rules;
        assert_eq!(rules.len(), 5);
        let p = profile(
            &reg,
            &[
                ("knee_flexion_lead_mean_br", 55.0),
                ("trunk_lateral_tilt_p90_br", 30.0),
                ("elbow_flexion_throw_p90_mer", 120.0),
                ("shoulder_abduction_throw_p90_mer", 100.0),
                ("hip_shoulder_separation_mean_fp", -70.0),
            ],
        );
        let flags = static_flags(&p, &reg, &rules).unwrap();
        // hand evaluation: rules 1, 3 and 5 hold
        assert_eq!(flags, vec![rules[0].to_string(), rules[2].to_string(), rules[4].to_string()]);
    }

    #[test]
    fn rules_round_trip_toml() {
        let set = RuleSet::default();
        let s = toml::to_string(&set).unwrap();
        assert_eq!(RuleSet::from_toml(&s).unwrap(), set);
    }
}
