//! The 18 pitching metrics and the three delivery events.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    FootPlant,
    Mer,
    BallRelease,
}

impl Event {
    pub const ALL: [Event; 3] = [Event::FootPlant, Event::Mer, Event::BallRelease];

    pub fn name(self) -> &'static str {
        match self {
            Event::FootPlant => "foot_plant",
            Event::Mer => "mer",
            Event::BallRelease => "ball_release",
        }
    }

    /// Suffix used in feature names (`fp`, `mer`, `br`).
    pub fn short(self) -> &'static str {
        match self {
            Event::FootPlant => "fp",
            Event::Mer => "mer",
            Event::BallRelease => "br",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Event {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Event::ALL
            .into_iter()
            .find(|e| e.name() == s || e.short() == s)
            .ok_or_else(|| format!("unknown event {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Degrees,
    Feet,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Degrees => "deg",
            Unit::Feet => "ft",
        }
    }
}

macro_rules! metrics {
    ($($variant:ident => $name:literal, $unit:ident, $event:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum MetricName {
            $($variant,)*
        }

        impl MetricName {
            pub const ALL: [MetricName; 18] = [$(MetricName::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(MetricName::$variant => $name,)*
                }
            }

            pub fn unit(self) -> Unit {
                match self {
                    $(MetricName::$variant => Unit::$unit,)*
                }
            }

            /// Event at which the per-pitcher statistics sample this metric.
            pub fn default_event(self) -> Event {
                match self {
                    $(MetricName::$variant => Event::$event,)*
                }
            }
        }
    };
}

metrics! {
    KneeFlexionLead => "knee_flexion_lead", Degrees, BallRelease;
    KneeFlexionTrail => "knee_flexion_trail", Degrees, FootPlant;
    ShinAngleXLead => "shin_angle_x_lead", Degrees, FootPlant;
    ShinAngleYLead => "shin_angle_y_lead", Degrees, FootPlant;
    ShinAngleXTrail => "shin_angle_x_trail", Degrees, FootPlant;
    ShinAngleYTrail => "shin_angle_y_trail", Degrees, FootPlant;
    ElbowFlexionThrow => "elbow_flexion_throw", Degrees, Mer;
    ElbowFlexionGlove => "elbow_flexion_glove", Degrees, FootPlant;
    ShoulderAbductionThrow => "shoulder_abduction_throw", Degrees, Mer;
    ShoulderAbductionGlove => "shoulder_abduction_glove", Degrees, FootPlant;
    PelvisRotation => "pelvis_rotation", Degrees, FootPlant;
    TorsoRotation => "torso_rotation", Degrees, BallRelease;
    HipShoulderSeparation => "hip_shoulder_separation", Degrees, FootPlant;
    TrunkForwardTilt => "trunk_forward_tilt", Degrees, BallRelease;
    TrunkLateralTilt => "trunk_lateral_tilt", Degrees, BallRelease;
    CogX => "cog_x", Feet, BallRelease;
    CogY => "cog_y", Feet, BallRelease;
    CogZ => "cog_z", Feet, BallRelease;
}

impl MetricName {
    pub fn index(self) -> usize {
        self as usize
    }

    /// Positional metrics are validated against the 0.1 ft threshold.
    pub fn is_positional(self) -> bool {
        self.unit() == Unit::Feet
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

/// Metrics that also get a temporal derivative series.
pub const DERIVATIVE_METRICS: [MetricName; 3] = [
    MetricName::ElbowFlexionThrow,
    MetricName::KneeFlexionLead,
    MetricName::HipShoulderSeparation,
];

pub fn derivative_name(m: MetricName) -> String {
    format!("{}_velocity", m.name())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_18_unique_names() {
        let mut names: Vec<_> = MetricName::ALL.iter().map(|m| m.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 18);
        for (i, m) in MetricName::ALL.iter().enumerate() {
            assert_eq!(m.index(), i);
            assert_eq!(m.name().parse::<MetricName>().unwrap(), *m);
        }
        assert_eq!(MetricName::ALL.iter().filter(|m| m.is_positional()).count(), 3);
    }

    #[test]
    fn events_parse_long_and_short() {
        assert_eq!("mer".parse::<Event>().unwrap(), Event::Mer);
        assert_eq!("br".parse::<Event>().unwrap(), Event::BallRelease);
        assert_eq!("foot_plant".parse::<Event>().unwrap(), Event::FootPlant);
        assert!("release".parse::<Event>().is_err());
    }
}
