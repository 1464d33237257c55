//! Delivery events, the 18 biomechanical metrics and their derivatives.

pub mod derivative;
pub mod events;
pub mod kinematics;
pub mod registry;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::handedness::Roles;
use crate::pose::PoseSequence;
use crate::savgol::SavGolError;

pub use derivative::{temporal_derivative, unwrap_degrees};
pub use events::{detect_events, DeliveryEvents};
pub use kinematics::{metric_series, CogAnchor, CogConfig, MetricSeries};
pub use registry::{derivative_name, Event, MetricName, Unit, DERIVATIVE_METRICS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("event order violated: foot_plant={foot_plant}, mer={mer:?}, ball_release={ball_release}")]
    EventOrderViolation { foot_plant: usize, mer: Option<usize>, ball_release: usize },
    #[error("sequence of {len} frames is too short (need {need})")]
    TooShort { len: usize, need: usize },
    #[error("metric {metric}: {source}")]
    Derivative { metric: String, source: SavGolError },
    #[error("metric {metric}: degenerate in every frame")]
    AllDegenerate { metric: String },
    #[error("event frame {frame} outside sequence of {len} frames")]
    EventOutOfRange { frame: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub cog: CogConfig,
}

/// Each metric sampled at the three delivery events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTable {
    /// `values[metric][event]`, events in [`Event::ALL`] order.
    pub values: Vec<[f64; 3]>,
}

impl EventTable {
    pub fn get(&self, m: MetricName, e: Event) -> f64 {
        let k = Event::ALL.iter().position(|x| *x == e).expect("event in ALL");
        self.values[m.index()][k]
    }

    /// Value at the metric's designated event.
    pub fn designated(&self, m: MetricName) -> f64 {
        self.get(m, m.default_event())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsOutput {
    pub series: Vec<MetricSeries>,
    pub derivatives: Vec<MetricSeries>,
    pub events: DeliveryEvents,
    pub table: EventTable,
}

impl MetricsOutput {
    pub fn series(&self, m: MetricName) -> &MetricSeries {
        &self.series[m.index()]
    }
}

pub fn sample_events(series: &[MetricSeries], events: &DeliveryEvents) -> Result<EventTable, MetricsError> {
    let mut values = Vec::with_capacity(series.len());
    for s in series {
        let mut row = [0.0; 3];
        for (k, e) in Event::ALL.iter().enumerate() {
            let t = events.frame(*e);
            row[k] = *s.values.get(t).ok_or(MetricsError::EventOutOfRange { frame: t, len: s.len() })?;
        }
        values.push(row);
    }
    Ok(EventTable { values })
}

/// The 18 series, the 3 derivative series and the event-sampled table.
pub fn compute_all(seq: &PoseSequence, roles: &Roles, events: &DeliveryEvents, cfg: &MetricsConfig) -> Result<MetricsOutput, MetricsError> {
    let series = metric_series(seq, roles, &cfg.cog);
    for s in &series {
        if s.flagged.len() == s.len() {
            return Err(MetricsError::AllDegenerate { metric: s.name.clone() });
        }
    }
    let mut derivatives = Vec::with_capacity(DERIVATIVE_METRICS.len());
    for m in DERIVATIVE_METRICS {
        let s = &series[m.index()];
        let v = unwrap_degrees(&s.values);
        let d = temporal_derivative(&v, seq.fps()).map_err(|source| MetricsError::Derivative { metric: m.name().into(), source })?;
        derivatives.push(MetricSeries { name: derivative_name(m), unit: s.unit, values: d, flagged: s.flagged.clone() });
    }
    let table = sample_events(&series, events)?;
    Ok(MetricsOutput { series, derivatives, events: events.clone(), table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::handedness::{assign_roles, Handedness};
    use crate::pose::Space;
    use crate::refine::kinematics::{fk, JointAngles};
    use crate::refine::skeleton::{coord, SkeletonModel};

    fn seq(n: usize) -> PoseSequence {
        let skel = SkeletonModel::default();
        let frames: Vec<_> = (0..n)
            .map(|t| {
                let mut q = JointAngles::rest(Vec3::new(0.01 * t as f64, 0.0, 3.2));
                q.root_orient = [-90.0 + t as f64, 0.0, 0.0];
                q.theta[coord::L_KNEE] = 30.0 + 0.5 * t as f64;
                q.theta[coord::R_ELBOW] = 20.0 + t as f64;
                fk(&q, &skel.lengths)
            })
            .collect();
        PoseSequence::from_positions(&frames, 1000.0, Space::Global).unwrap()
    }

    #[test]
    fn registry_complete_and_table_sampled() {
        let s = seq(40);
        let roles = assign_roles(Handedness::Right);
        let ev = DeliveryEvents { foot_plant: 5, mer: 20, ball_release: 30, confidence_flags: vec![] };
        let out = compute_all(&s, &roles, &ev, &MetricsConfig::default()).unwrap();
        assert_eq!(out.series.len(), 18);
        assert_eq!(out.derivatives.len(), 3);
        let names: std::collections::BTreeSet<_> = out.series.iter().map(|s| s.name.clone()).collect();
        assert_eq!(names.len(), 18);
        assert!((out.table.get(MetricName::KneeFlexionLead, Event::FootPlant) - 32.5).abs() < 1e-9);
        assert!((out.table.designated(MetricName::ElbowFlexionThrow) - 40.0).abs() < 1e-9);
        // 1 degree per frame of elbow flexion at 1000 fps
        let d = &out.derivatives[0];
        assert_eq!(d.name, "elbow_flexion_throw_velocity");
        assert!(d.values.iter().all(|v| (v - 1000.0).abs() < 1e-6));
        // separation identity
        for t in 0..40 {
            let p = out.series(MetricName::PelvisRotation).values[t];
            let q = out.series(MetricName::TorsoRotation).values[t];
            let sep = out.series(MetricName::HipShoulderSeparation).values[t];
            assert!((crate::geom::normalize_degrees(q - p) - sep).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_event_errors() {
        let s = seq(20);
        let ev = DeliveryEvents { foot_plant: 5, mer: 10, ball_release: 25, confidence_flags: vec![] };
        let r = compute_all(&s, &assign_roles(Handedness::Right), &ev, &MetricsConfig::default());
        assert!(matches!(r, Err(MetricsError::EventOutOfRange { .. })));
    }
}
