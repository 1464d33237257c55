//! Pelvis-to-global lifting.
//!
//! A trajectory of `n` pelvis positions is encoded as an anchor (first
//! position), an initial per-frame velocity `v0` and `n − 2` velocity
//! increments. Sequences are lifted window by window: the predictor sees `n`
//! pelvis-rooted frames starting at the last committed frame, the window is
//! reconstructed from the committed anchor and only the next `K` frames are
//! committed before the window advances.

use std::path::Path;

use thiserror::Error;

use crate::geom::Vec3;
use crate::pose::{Frame, JointId, PoseSequence, Space};

pub const DEFAULT_WINDOW: usize = 30;
pub const DEFAULT_COMMIT: usize = 10;

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("trajectory needs at least 2 frames, got {0}")]
    Length(usize),
    #[error("bad window configuration: window {window}, commit stride {commit}")]
    BadWindow { window: usize, commit: usize },
    #[error("input sequence must be pelvis-rooted")]
    NotPelvisRooted,
    #[error("predictor failed on window {window}: {msg}")]
    Predictor { window: usize, msg: String },
    #[error("unknown predictor spec {0:?}")]
    UnknownPredictor(String),
    #[error(transparent)]
    Pose(#[from] crate::pose::PoseError),
}

/// `n` consecutive pelvis-rooted frames plus the committed state at the first one.
#[derive(Debug, Clone)]
pub struct TrajectoryWindow<'a> {
    /// Index of the first frame in the full sequence.
    pub start: usize,
    pub poses: &'a [Frame],
    /// Committed global pelvis position at `start`.
    pub anchor: Vec3,
    /// Last committed per-frame velocity (`τ_start − τ_{start−1}`), if any.
    pub incoming_velocity: Option<Vec3>,
}

impl TrajectoryWindow<'_> {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Velocity parameterisation of a pelvis trajectory (ft/frame).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityParam {
    pub v0: Vec3,
    /// `dv[i] = v[i+1] − v[i]`; length `n − 2`.
    pub dv: Vec<Vec3>,
}

pub trait TrajectoryPredictor {
    /// Predicts the window's trajectory; `dv` must have `window.len() − 2` entries
    /// (empty for 2-frame windows).
    fn predict(&self, window: &TrajectoryWindow<'_>) -> Result<VelocityParam, String>;
}

/// `τ_1 = anchor`, `v_1 = v0`, `v_{i+1} = v_i + dv_i`, `τ_{i+1} = τ_i + v_i`.
pub fn reconstruct_trajectory(dv: &[Vec3], anchor: Vec3, v0: Vec3) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(dv.len() + 2);
    let mut pos = anchor;
    let mut vel = v0;
    out.push(pos);
    pos += vel;
    out.push(pos);
    for d in dv {
        vel += *d;
        pos += vel;
        out.push(pos);
    }
    out
}

/// Inverse of [`reconstruct_trajectory`]: returns `(anchor, param)`.
pub fn encode_trajectory(traj: &[Vec3]) -> Result<(Vec3, VelocityParam), LiftError> {
    if traj.len() < 2 {
        return Err(LiftError::Length(traj.len()));
    }
    let vel: Vec<Vec3> = traj.windows(2).map(|w| w[1] - w[0]).collect();
    let dv = vel.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((traj[0], VelocityParam { v0: vel[0], dv }))
}

/// Predictor that reads a known global pelvis trajectory (testing and synthetic runs).
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    pub trajectory: Vec<Vec3>,
}

impl TrajectoryPredictor for OraclePredictor {
    fn predict(&self, w: &TrajectoryWindow<'_>) -> Result<VelocityParam, String> {
        let end = w.start + w.len();
        let slice = self
            .trajectory
            .get(w.start..end)
            .ok_or_else(|| format!("ground truth has {} frames, window needs {end}", self.trajectory.len()))?;
        encode_trajectory(slice).map(|(_, p)| p).map_err(|e| e.to_string())
    }
}

/// Carries the last committed velocity forward with no acceleration.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantVelocityPredictor;

impl TrajectoryPredictor for ConstantVelocityPredictor {
    fn predict(&self, w: &TrajectoryWindow<'_>) -> Result<VelocityParam, String> {
        Ok(VelocityParam {
            v0: w.incoming_velocity.unwrap_or_else(Vec3::zero),
            dv: vec![Vec3::zero(); w.len().saturating_sub(2)],
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPredictor;

impl TrajectoryPredictor for ZeroPredictor {
    fn predict(&self, w: &TrajectoryWindow<'_>) -> Result<VelocityParam, String> {
        Ok(VelocityParam { v0: Vec3::zero(), dv: vec![Vec3::zero(); w.len().saturating_sub(2)] })
    }
}

/// Predictor chosen by name: `zero`, `constant_velocity` or `oracle:<path>`.
pub enum PredictorSpec {
    Zero,
    ConstantVelocity,
    Oracle(OraclePredictor),
}

impl PredictorSpec {
    /// Parses a predictor spec. `oracle:<path>` reads the global pelvis track
    /// from a global pose JSONL file (feet, any fps) or from a JSON object
    /// with a `trajectory` array of points.
    pub fn parse(spec: &str) -> Result<Self, LiftError> {
        match spec {
            "zero" => Ok(PredictorSpec::Zero),
            "constant_velocity" => Ok(PredictorSpec::ConstantVelocity),
            s if s.starts_with("oracle:") => {
                let path = Path::new(&s["oracle:".len()..]);
                let fail = |e: String| LiftError::UnknownPredictor(format!("{s}: {e}"));
                let trajectory = if path.extension().is_some_and(|e| e == "json") {
                    #[derive(serde::Deserialize)]
                    struct Track {
                        trajectory: Vec<Vec3>,
                    }
                    let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
                    serde_json::from_str::<Track>(&text).map_err(|e| fail(e.to_string()))?.trajectory
                } else {
                    crate::ingest::load_pose_sequence(path, crate::ingest::LengthUnit::Feet, 1000.0)
                        .map_err(|e| fail(e.to_string()))?
                        .track(JointId::Pelvis)
                };
                Ok(PredictorSpec::Oracle(OraclePredictor { trajectory }))
            }
            other => Err(LiftError::UnknownPredictor(other.to_string())),
        }
    }

    pub fn predictor(&self) -> &dyn TrajectoryPredictor {
        match self {
            PredictorSpec::Zero => &ZeroPredictor,
            PredictorSpec::ConstantVelocity => &ConstantVelocityPredictor,
            PredictorSpec::Oracle(o) => o,
        }
    }

    /// Starting anchor: the oracle's first position, the origin otherwise.
    pub fn initial_anchor(&self) -> Vec3 {
        match self {
            PredictorSpec::Oracle(o) => o.trajectory.first().copied().unwrap_or_else(Vec3::zero),
            _ => Vec3::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LiftConfig {
    pub window: usize,
    pub commit: usize,
    pub initial_anchor: Vec3,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self { window: DEFAULT_WINDOW, commit: DEFAULT_COMMIT, initial_anchor: Vec3::zero() }
    }
}

/// Global pelvis translation for every frame of a pelvis-rooted sequence.
pub fn lift_trajectory(
    seq: &PoseSequence,
    predictor: &dyn TrajectoryPredictor,
    cfg: &LiftConfig,
) -> Result<Vec<Vec3>, LiftError> {
    if cfg.window < 2 || cfg.commit == 0 || cfg.commit > cfg.window {
        return Err(LiftError::BadWindow { window: cfg.window, commit: cfg.commit });
    }
    if seq.space() != Space::PelvisRooted {
        return Err(LiftError::NotPelvisRooted);
    }
    let total = seq.len();
    let mut committed = Vec::with_capacity(total);
    committed.push(cfg.initial_anchor);
    let mut window_idx = 0;
    while committed.len() < total {
        let start = committed.len() - 1;
        let end = (start + cfg.window).min(total);
        let window = TrajectoryWindow {
            start,
            poses: &seq.frames()[start..end],
            anchor: committed[start],
            incoming_velocity: (start > 0).then(|| committed[start] - committed[start - 1]),
        };
        let param = predictor
            .predict(&window)
            .map_err(|msg| LiftError::Predictor { window: window_idx, msg })?;
        let expected = window.len() - 2;
        if param.dv.len() != expected || !param.v0.is_finite() || param.dv.iter().any(|d| !d.is_finite()) {
            return Err(LiftError::Predictor {
                window: window_idx,
                msg: format!("expected {expected} finite increments, got {}", param.dv.len()),
            });
        }
        let traj = reconstruct_trajectory(&param.dv, window.anchor, param.v0);
        // the window reaching the last frame commits its whole tail
        let take = if end == total { traj.len() - 1 } else { cfg.commit.min(traj.len() - 1) };
        committed.extend_from_slice(&traj[1..=take]);
        window_idx += 1;
    }
    Ok(committed)
}

/// Lifts a pelvis-rooted sequence to global space; every joint is offset by
/// the committed pelvis translation of its frame.
pub fn lift_sequence(
    seq: &PoseSequence,
    predictor: &dyn TrajectoryPredictor,
    cfg: &LiftConfig,
) -> Result<PoseSequence, LiftError> {
    let traj = lift_trajectory(seq, predictor, cfg)?;
    let frames = seq.frames().iter().zip(&traj).map(|(f, tau)| f.translated(*tau)).collect();
    Ok(PoseSequence::new(frames, seq.fps(), Space::Global)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::NUM_JOINTS;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn rooted(n: usize) -> PoseSequence {
        let pose: Vec<[Vec3; NUM_JOINTS]> = (0..n)
            .map(|t| {
                let mut p = [Vec3::zero(); NUM_JOINTS];
                for (j, q) in p.iter_mut().enumerate() {
                    if j != JointId::Pelvis.index() {
                        *q = v(j as f64 * 0.1, (t as f64 * 0.37).sin(), 1.0 + j as f64 * 0.01);
                    }
                }
                p
            })
            .collect();
        PoseSequence::from_positions(&pose, 1000.0, Space::PelvisRooted).unwrap()
    }

    fn cubic_path(n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let t = i as f64 * 0.01;
                v(2.0 + 3.0 * t - t * t + 0.5 * t * t * t, -1.0 + 0.2 * t, 3.0 + 0.1 * t * t)
            })
            .collect()
    }

    #[test]
    fn reconstruct_examples() {
        let flat = reconstruct_trajectory(&[Vec3::zero(); 3], Vec3::zero(), Vec3::zero());
        assert!(flat.iter().all(|p| *p == Vec3::zero()));
        let line = reconstruct_trajectory(&[Vec3::zero(); 8], v(5., 0., 6.), v(0.01, 0., 0.));
        for (i, p) in line.iter().enumerate() {
            assert!((p.x - (5.0 + 0.01 * i as f64)).abs() < 1e-12);
            assert_eq!((p.y, p.z), (0.0, 6.0));
        }
    }

    #[test]
    fn encode_examples() {
        let line: Vec<Vec3> = (0..10).map(|i| v(i as f64 * 0.5, 1.0, 2.0 - i as f64 * 0.25)).collect();
        let (_, p) = encode_trajectory(&line).unwrap();
        assert!(p.dv.iter().all(|d| d.norm() < 1e-12));

        // z(t) = 0.5 g t² sampled per frame: second difference is g everywhere
        let g = 0.003;
        let para: Vec<Vec3> = (0..20).map(|i| v(0., 0., 0.5 * g * (i * i) as f64)).collect();
        let (_, p) = encode_trajectory(&para).unwrap();
        assert_eq!(p.dv.len(), 18);
        assert!(p.dv.iter().all(|d| (d.z - g).abs() < 1e-12 && d.x == 0.0));

        let (a, p) = encode_trajectory(&[v(1., 2., 3.), v(1.5, 2., 2.)]).unwrap();
        assert_eq!(a, v(1., 2., 3.));
        assert!(p.dv.is_empty());
        assert_eq!(p.v0, v(0.5, 0., -1.));
        assert!(matches!(encode_trajectory(&[v(0., 0., 0.)]), Err(LiftError::Length(1))));
    }

    #[test]
    fn cubic_round_trip() {
        let path = cubic_path(50);
        let (a, p) = encode_trajectory(&path).unwrap();
        let back = reconstruct_trajectory(&p.dv, a, p.v0);
        for (x, y) in path.iter().zip(&back) {
            assert!(x.max_abs_diff(*y) < 1e-9);
        }
    }

    #[test]
    fn oracle_lifting_is_exact() {
        let seq = rooted(300);
        let truth = cubic_path(300);
        let oracle = OraclePredictor { trajectory: truth.clone() };
        let cfg = LiftConfig { initial_anchor: truth[0], ..Default::default() };
        let out = lift_sequence(&seq, &oracle, &cfg).unwrap();
        assert_eq!(out.space(), Space::Global);
        for (f, tau) in out.frames().iter().zip(&truth) {
            assert!(f.pos(JointId::Pelvis).max_abs_diff(*tau) < 1e-6);
        }
    }

    #[test]
    fn zero_predictor_pins_pelvis() {
        let seq = rooted(64);
        let cfg = LiftConfig { initial_anchor: v(1., 2., 3.), ..Default::default() };
        let out = lift_sequence(&seq, &ZeroPredictor, &cfg).unwrap();
        assert!(out.frames().iter().all(|f| f.pos(JointId::Pelvis) == v(1., 2., 3.)));
    }

    struct CountingPredictor(std::cell::Cell<usize>);
    impl TrajectoryPredictor for CountingPredictor {
        fn predict(&self, w: &TrajectoryWindow<'_>) -> Result<VelocityParam, String> {
            self.0.set(self.0.get() + 1);
            ZeroPredictor.predict(w)
        }
    }

    #[test]
    fn short_sequence_is_one_window() {
        let seq = rooted(20);
        let p = CountingPredictor(std::cell::Cell::new(0));
        let out = lift_sequence(&seq, &p, &LiftConfig::default()).unwrap();
        assert_eq!(out.len(), 20);
        assert_eq!(p.0.get(), 1);
    }

    #[test]
    fn constant_velocity_continues_last_committed_step() {
        let seq = rooted(40);
        let out = lift_trajectory(&seq, &ConstantVelocityPredictor, &LiftConfig::default()).unwrap();
        assert!(out.iter().all(|p| *p == Vec3::zero()));
    }

    #[test]
    fn predictor_errors_carry_window_index() {
        struct Failing;
        impl TrajectoryPredictor for Failing {
            fn predict(&self, w: &TrajectoryWindow<'_>) -> Result<VelocityParam, String> {
                if w.start > 0 { Err("boom".into()) } else { ZeroPredictor.predict(w) }
            }
        }
        match lift_sequence(&rooted(100), &Failing, &LiftConfig::default()) {
            Err(LiftError::Predictor { window, .. }) => assert_eq!(window, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_global_input_and_bad_windows() {
        let g = rooted(10).translated(v(1., 0., 0.));
        assert!(matches!(lift_sequence(&g, &ZeroPredictor, &LiftConfig::default()), Err(LiftError::NotPelvisRooted)));
        let cfg = LiftConfig { window: 5, commit: 6, ..Default::default() };
        assert!(matches!(lift_sequence(&rooted(10), &ZeroPredictor, &cfg), Err(LiftError::BadWindow { .. })));
    }

    #[test]
    fn predictor_specs_parse() {
        assert!(matches!(PredictorSpec::parse("zero"), Ok(PredictorSpec::Zero)));
        assert!(matches!(PredictorSpec::parse("constant_velocity"), Ok(PredictorSpec::ConstantVelocity)));
        assert!(matches!(PredictorSpec::parse("transformer"), Err(LiftError::UnknownPredictor(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.json");
        std::fs::write(&path, r#"{"pitch_id": "a", "trajectory": [[1.0, 2.0, 3.0]]}"#).unwrap();
        let spec = PredictorSpec::parse(&format!("oracle:{}", path.display())).unwrap();
        assert_eq!(spec.initial_anchor(), v(1.0, 2.0, 3.0));
        assert!(PredictorSpec::parse(&format!("oracle:{}", dir.path().join("missing.jsonl").display())).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn length_and_offsets_preserved(t in 2usize..120, n in 2usize..40, k_frac in 0.0..1.0f64) {
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let seq = rooted(t);
            let truth = cubic_path(t);
            let oracle = OraclePredictor { trajectory: truth.clone() };
            let cfg = LiftConfig { window: n, commit: k, initial_anchor: truth[0] };
            let out = lift_sequence(&seq, &oracle, &cfg).unwrap();
            prop_assert_eq!(out.len(), t);
            for ((fo, fi), tau) in out.frames().iter().zip(seq.frames()).zip(&truth) {
                let pel = fo.pos(JointId::Pelvis);
                prop_assert!(pel.max_abs_diff(*tau) < 1e-6);
                for id in JointId::ALL {
                    prop_assert_eq!(fo.pos(id), fi.pos(id) + pel);
                }
            }
        }
    }
}
