use pitchkin::analytics::validation_stats;
use pitchkin::handedness::{assign_roles, classify_handedness, Handedness};
use pitchkin::lifting::{lift_sequence, ConstantVelocityPredictor, LiftConfig, OraclePredictor};
use pitchkin::metrics::{compute_all, detect_events, MetricName, MetricsConfig};
use pitchkin::refine::{refine_pipeline, RefineConfig};
use pitchkin::synth::{corpus_config, corrupt, generate, CorruptConfig, SynthConfig};

#[test]
fn clean_pitch_round_trips_through_every_stage() {
    for side in [Handedness::Right, Handedness::Left] {
        let s = generate(&SynthConfig { seed: 9, handedness: side, ..Default::default() }).unwrap();
        let pred = OraclePredictor { trajectory: s.truth.trajectory.clone() };
        let cfg = LiftConfig { initial_anchor: s.truth.trajectory[0], ..Default::default() };
        let lifted = lift_sequence(&s.rooted, &pred, &cfg).unwrap();
        assert_eq!(classify_handedness(&lifted).unwrap().side, side);
        let refined = refine_pipeline(&lifted, &RefineConfig::default()).unwrap();
        let ik = refined.report.ik.unwrap();
        assert_eq!(ik.non_converged, 0);
        assert!(ik.max_residual < 1e-6);
        let roles = assign_roles(side);
        let events = detect_events(&refined.sequence, &roles).unwrap();
        assert_eq!(events, s.truth.events);
        let out = compute_all(&refined.sequence, &roles, &events, &MetricsConfig::default()).unwrap();
        for m in MetricName::ALL {
            let got = &out.series(m).values;
            let want = s.truth.metric(m);
            let max = got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(max < 1e-3, "{} max error {max}", m.name());
        }
    }
}

#[test]
fn wrong_predictor_still_refines() {
    let s = generate(&SynthConfig::default()).unwrap();
    let lifted = lift_sequence(&s.rooted, &ConstantVelocityPredictor, &LiftConfig::default()).unwrap();
    let refined = refine_pipeline(&lifted, &RefineConfig::default()).unwrap();
    assert_eq!(refined.sequence.len(), s.rooted.len());
    // angles do not depend on the global offset
    let roles = assign_roles(Handedness::Right);
    let out = compute_all(&refined.sequence, &roles, &s.truth.events, &MetricsConfig::default()).unwrap();
    let knee = MetricName::KneeFlexionLead;
    let fp = s.truth.events.foot_plant;
    assert!((out.series(knee).values[fp] - s.truth.metric(knee)[fp]).abs() < 1e-3);
}

#[test]
fn noisy_corpus_validates_most_metrics() {
    let base = SynthConfig::default();
    let mut pred = vec![Vec::new(); 18];
    let mut truth = vec![Vec::new(); 18];
    for i in 0..12 {
        let cfg = corpus_config(&base, i, false);
        let s = generate(&cfg).unwrap();
        let noisy = corrupt(&s.global, &CorruptConfig { sigma: 0.005, outlier_rate: 0.01, bone_jitter: 0.05, seed: i });
        let refined = refine_pipeline(&noisy, &RefineConfig::default()).unwrap();
        let out = compute_all(&refined.sequence, &assign_roles(cfg.handedness), &s.truth.events, &MetricsConfig::default()).unwrap();
        for m in MetricName::ALL {
            pred[m.index()].push(out.table.designated(m));
            truth[m.index()].push(s.truth.at_event(m, m.default_event()));
        }
    }
    let validated = MetricName::ALL
        .iter()
        .filter(|m| validation_stats(&pred[m.index()], &truth[m.index()], m.is_positional()).unwrap().validated)
        .count();
    assert!(validated >= 16, "{validated} of 18 validated");
}
