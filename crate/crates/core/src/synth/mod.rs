//! Synthetic pitches with analytic ground truth.
//!
//! Every rotational coordinate follows a single septic smoothstep between a
//! start and a finish value, spread over nearly the whole sequence. The lead
//! ankle path is designed directly (stride, descent, then a slow settle) and
//! the pelvis is placed so forward kinematics puts the ankle on it; this
//! makes the foot-plant frame a design parameter.

pub mod cohort;
pub mod corrupt;
pub mod truth;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec3;
use crate::handedness::Handedness;
use crate::ingest::ReferenceRecord;
use crate::metrics::registry::{Event, MetricName};
use crate::metrics::DeliveryEvents;
use crate::pose::{frame_time_ms, Frame, JointId, PoseError, PoseSequence, Space};
use crate::refine::kinematics::{fk, JointAngles};
use crate::refine::skeleton::{coord, JointLimits, SkeletonModel, NUM_EDGES};

pub use cohort::{cohort, planted_matrix, Cohort, CohortConfig};
pub use corrupt::{corrupt, CorruptConfig};

pub const MIN_FRAMES: usize = 200;
pub const MAX_FRAMES: usize = 400;
/// Static frames kept at each end of the sequence.
const MARGIN: usize = 4;
/// Lead ankle height above its final value that still counts as planted.
const PLANT_TOL: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("infeasible targets: {0}")]
    InfeasibleTargets(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Pose(#[from] PoseError),
}

/// Keyframe values a generated pitch must hit exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthTargets {
    /// Lead knee flexion at foot plant (degrees).
    pub knee_flexion_lead_fp: Option<f64>,
    /// Forward trunk tilt at ball release (degrees).
    pub trunk_forward_tilt_br: Option<f64>,
}

impl Default for SynthTargets {
    fn default() -> Self {
        SynthTargets { knee_flexion_lead_fp: Some(45.0), trunk_forward_tilt_br: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub handedness: Handedness,
    /// Uniform scale applied to the default bone lengths.
    pub scale: f64,
    pub fps: f64,
    pub frames: usize,
    /// Foot plant as a fraction of the sequence.
    pub foot_plant_at: f64,
    pub targets: SynthTargets,
    /// Multiplier on the per-seed spread of start/finish values.
    pub variation: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            handedness: Handedness::Right,
            scale: 1.0,
            fps: 1000.0,
            frames: 300,
            foot_plant_at: 0.42,
            targets: SynthTargets::default(),
            variation: 1.0,
        }
    }
}

impl SynthConfig {
    pub fn from_toml(s: &str) -> Result<Self, SynthError> {
        toml::from_str(s).map_err(|e| SynthError::Config(e.to_string()))
    }

    pub fn lengths(&self) -> [f64; NUM_EDGES] {
        SkeletonModel::default().lengths.map(|l| l * self.scale)
    }

    pub fn foot_plant(&self) -> usize {
        (self.foot_plant_at * self.frames as f64).round() as usize
    }

    fn settle_window(&self) -> usize {
        (100.0 * (self.fps / 1000.0).max(1.0)).ceil() as usize
    }

    fn validate(&self) -> Result<(), SynthError> {
        if !(MIN_FRAMES..=MAX_FRAMES).contains(&self.frames) {
            return Err(SynthError::Config(format!("frames {} outside [{MIN_FRAMES}, {MAX_FRAMES}]", self.frames)));
        }
        if !(self.fps.is_finite() && self.fps >= 30.0) {
            return Err(SynthError::Config(format!("fps {} must be >= 30", self.fps)));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(SynthError::Config(format!("scale {} must be positive", self.scale)));
        }
        if !(self.variation.is_finite() && self.variation >= 0.0) {
            return Err(SynthError::Config("variation must be >= 0".into()));
        }
        let fp = self.foot_plant();
        let w = self.settle_window();
        if fp < MARGIN + 60 || fp + w * 6 / 10 + MARGIN >= self.frames {
            return Err(SynthError::Config(format!("foot plant frame {fp} leaves no room for the stride and settle")));
        }
        Ok(())
    }
}

/// Septic smoothstep: 0 to 1 with zero first three derivatives at both ends.
pub fn smoothstep7(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u.powi(4) * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Transition {
    from: f64,
    to: f64,
    t0: f64,
    t1: f64,
}

impl Transition {
    fn at(&self, t: f64) -> f64 {
        self.from + (self.to - self.from) * smoothstep7((t - self.t0) / (self.t1 - self.t0))
    }

    fn progress(&self, t: f64) -> f64 {
        smoothstep7((t - self.t0) / (self.t1 - self.t0))
    }
}

/// Start, finish and spread for each coordinate of a right-handed delivery:
/// root yaw, roll, then the 22 joint coordinates.
const ROOT_DESIGN: [(f64, f64, f64); 2] = [(-106.0, -71.0, 8.0), (-3.0, 6.0, 3.0)];
const THETA_DESIGN: [(f64, f64, f64); coord::COUNT] = [
    // lumbar z, x, y
    (-18.0, 12.0, 9.0),
    (-4.0, 10.0, 5.0),
    (0.0, 22.0, 6.0),
    // neck
    (0.0, 8.0, 3.0),
    (0.0, -4.0, 2.0),
    (5.0, 12.0, 3.0),
    // lead (left) hip
    (8.0, -4.0, 3.0),
    (5.0, 12.0, 3.0),
    (-62.0, -34.0, 6.0),
    // trail (right) hip
    (0.0, -8.0, 3.0),
    (-5.0, -12.0, 3.0),
    (-5.0, 8.0, 4.0),
    // knees: lead, trail
    (72.0, 42.0, 8.0),
    (15.0, 28.0, 6.0),
    // glove (left) shoulder
    (8.0, -14.0, 5.0),
    (30.0, 48.0, 6.0),
    (-35.0, -15.0, 6.0),
    // throwing (right) shoulder
    (0.0, 28.0, 6.0),
    (-35.0, -62.0, 6.0),
    (-12.0, 30.0, 8.0),
    // elbows: glove, throwing
    (80.0, 65.0, 8.0),
    (90.0, 48.0, 8.0),
];

/// Per-pitch ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTrack {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub handedness: Handedness,
    pub fps: f64,
    pub lengths: Vec<f64>,
    pub angles: Vec<JointAngles>,
    /// Global pelvis position per frame.
    pub trajectory: Vec<Vec3>,
    pub events: DeliveryEvents,
    pub metrics: Vec<MetricTrack>,
}

impl GroundTruth {
    pub fn metric(&self, m: MetricName) -> &[f64] {
        &self.metrics[m.index()].values
    }

    pub fn at_event(&self, m: MetricName, e: Event) -> f64 {
        self.metric(m)[self.events.frame(e)]
    }

    pub fn lengths_array(&self) -> [f64; NUM_EDGES] {
        std::array::from_fn(|i| self.lengths[i])
    }

    /// All 18 × 3 event-sampled values as reference records.
    pub fn records(&self, pitch_id: &str) -> Vec<ReferenceRecord> {
        MetricName::ALL
            .iter()
            .flat_map(|&m| {
                Event::ALL.iter().map(move |&e| ReferenceRecord { pitch_id: pitch_id.to_string(), metric: m, event: e, value: self.at_event(m, e) })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub global: PoseSequence,
    pub rooted: PoseSequence,
    pub truth: GroundTruth,
}

/// Reflects a pose through the x-z plane and swaps left and right.
pub fn mirror_angles(q: &JointAngles) -> JointAngles {
    let flip = |b: [f64; 3]| [-b[0], -b[1], b[2]];
    let mut m = *q;
    m.root_pos = q.root_pos.reflect_y();
    m.root_orient = flip(q.root_orient);
    let mut put = |dst: usize, src: usize| {
        let b = flip(q.ball(src));
        m.theta[dst..dst + 3].copy_from_slice(&b);
    };
    put(coord::LUMBAR, coord::LUMBAR);
    put(coord::NECK, coord::NECK);
    put(coord::L_HIP, coord::R_HIP);
    put(coord::R_HIP, coord::L_HIP);
    put(coord::L_SHOULDER, coord::R_SHOULDER);
    put(coord::R_SHOULDER, coord::L_SHOULDER);
    m.theta[coord::L_KNEE] = q.theta[coord::R_KNEE];
    m.theta[coord::R_KNEE] = q.theta[coord::L_KNEE];
    m.theta[coord::L_ELBOW] = q.theta[coord::R_ELBOW];
    m.theta[coord::R_ELBOW] = q.theta[coord::L_ELBOW];
    m
}

fn check_limits(q: &JointAngles, limits: &JointLimits, what: &str) -> Result<(), SynthError> {
    let v = q.limit_violation(limits);
    if v > 0.0 {
        return Err(SynthError::InfeasibleTargets(format!("{what} leaves the joint limits by {v:.3} deg")));
    }
    Ok(())
}

/// Transition through `target` at `t` with the given finish value; falls
/// back to holding the target when the solved start leaves `range`.
fn through(target: f64, to: f64, t: f64, t0: f64, t1: f64, range: (f64, f64)) -> Transition {
    let s = smoothstep7((t - t0) / (t1 - t0));
    let from = (target - to * s) / (1.0 - s);
    if (range.0..=range.1).contains(&from) {
        Transition { from, to, t0, t1 }
    } else {
        Transition { from: target, to: target, t0, t1 }
    }
}

fn throw_wrist(side: Handedness) -> JointId {
    match side {
        Handedness::Right => JointId::RWrist,
        Handedness::Left => JointId::LWrist,
    }
}

/// Ball release as the argmax of central-difference wrist speed (first wins).
fn release_frame(pos: &[[Vec3; 17]], wrist: JointId) -> usize {
    let n = pos.len();
    let speed = |t: usize| {
        let (a, b, k) = match t {
            0 => (1, 0, 1.0),
            t if t == n - 1 => (t, t - 1, 1.0),
            t => (t + 1, t - 1, 0.5),
        };
        (pos[a][wrist.index()] - pos[b][wrist.index()]).norm() * k
    };
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for t in 0..n {
        let v = speed(t);
        if v > best_v {
            best = t;
            best_v = v;
        }
    }
    best
}

/// Angle of the throwing forearm from the trunk's forward direction.
fn rotation_proxy(q: &JointAngles, lengths: &[f64; NUM_EDGES], side: Handedness) -> f64 {
    let seg = truth::segments(q);
    let k = match side {
        Handedness::Right => 1,
        Handedness::Left => 0,
    };
    let fa = seg.forearm[k] * nalgebra::Vector3::new(0.0, 0.0, -1.0);
    fa.dot(&truth::trunk_forward(q, lengths)).clamp(-1.0, 1.0).acos()
}

struct Design {
    root: [Transition; 2],
    theta: [Transition; coord::COUNT],
    stride: Vec3,
    descent: f64,
    settle: f64,
    stride_end: f64,
    settle_t0: f64,
    settle_t1: f64,
    ankle_base: f64,
}

impl Design {
    fn angles_at(&self, t: f64) -> JointAngles {
        let mut q = JointAngles::rest(Vec3::zero());
        q.root_orient = [self.root[0].at(t), self.root[1].at(t), 0.0];
        for (v, tr) in q.theta.iter_mut().zip(&self.theta) {
            *v = tr.at(t);
        }
        q
    }

    /// Designed lead-ankle position, relative to its start.
    fn ankle_at(&self, t: f64) -> Vec3 {
        let stride = Transition { from: 0.0, to: 1.0, t0: MARGIN as f64, t1: self.stride_end };
        let p = stride.progress(t);
        let settle = Transition { from: 1.0, to: 0.0, t0: self.settle_t0, t1: self.settle_t1 };
        Vec3::new(self.stride.x * p, self.stride.y * p, self.ankle_base + self.descent * (1.0 - p) + self.settle * settle.at(t))
    }

    /// Angles with the pelvis placed so the lead ankle follows its design.
    fn pose_at(&self, t: f64, lengths: &[f64; NUM_EDGES], ankle0: Vec3) -> JointAngles {
        let mut q = self.angles_at(t);
        let g = truth::positions(&q, lengths)[JointId::LAnkle.index()];
        q.root_pos = ankle0 + self.ankle_at(t) - g;
        q
    }
}

fn spread(rng: &mut ChaCha8Rng, w: f64) -> f64 {
    if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 }
}

/// Lead-knee flexion range (degrees) that corpus targets are drawn from.
pub const CORPUS_KNEE_RANGE: (f64, f64) = (35.0, 55.0);

/// Config for pitch `index` of a corpus built from `base`: its own seed,
/// handedness alternating from `base.handedness`, and a lead-knee target
/// drawn from [`CORPUS_KNEE_RANGE`] unless `base` fixes one.
pub fn corpus_config(base: &SynthConfig, index: u64, fixed_knee: bool) -> SynthConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed);
    rng.set_stream(index);
    let mut cfg = base.clone();
    cfg.seed = rng.random();
    if index % 2 == 1 {
        cfg.handedness = base.handedness.opposite();
    }
    if !fixed_knee {
        let (lo, hi) = CORPUS_KNEE_RANGE;
        cfg.targets.knee_flexion_lead_fp = Some(lo + (hi - lo) * rng.random::<f64>());
    }
    cfg
}

pub fn generate(cfg: &SynthConfig) -> Result<Synthesized, SynthError> {
    cfg.validate()?;
    let limits = SkeletonModel::default().limits;
    if let Some(k) = cfg.targets.knee_flexion_lead_fp {
        let r = limits.theta[coord::L_KNEE];
        if !(r.min..=r.max).contains(&k) {
            return Err(SynthError::InfeasibleTargets(format!("lead knee flexion {k} outside [{}, {}]", r.min, r.max)));
        }
    }
    if let Some(tau) = cfg.targets.trunk_forward_tilt_br {
        if !(-60.0..=80.0).contains(&tau) {
            return Err(SynthError::InfeasibleTargets(format!("trunk forward tilt {tau} outside [-60, 80]")));
        }
    }
    let n = cfg.frames;
    let lengths = cfg.lengths();
    let fp = cfg.foot_plant();
    let (t0, t1) = (MARGIN as f64, (n - 1 - MARGIN) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v = cfg.variation;
    let tr = |(a, b, w): (f64, f64, f64), rng: &mut ChaCha8Rng| Transition { from: a + spread(rng, w * v), to: b + spread(rng, w * v), t0, t1 };
    let root = ROOT_DESIGN.map(|d| tr(d, &mut rng));
    let mut theta = THETA_DESIGN.map(|d| tr(d, &mut rng));
    let stride = Vec3::new(0.6 + spread(&mut rng, 0.15 * v), spread(&mut rng, 0.2 * v), 0.0);
    let descent = 0.35 + spread(&mut rng, 0.1 * v);

    if let Some(k) = cfg.targets.knee_flexion_lead_fp {
        let r = limits.theta[coord::L_KNEE];
        theta[coord::L_KNEE] = through(k, theta[coord::L_KNEE].to, fp as f64, t0, t1, (r.min, r.max));
    }

    let w = cfg.settle_window() as f64;
    let settle_t0 = fp as f64 - 0.4 * w;
    let settle_t1 = fp as f64 + 0.6 * w;
    // the height band is crossed half a frame before foot plant
    let settle = PLANT_TOL / (1.0 - smoothstep7((fp as f64 - 0.5 - settle_t0) / w));
    let mut design = Design {
        root,
        theta,
        stride,
        descent,
        settle,
        stride_end: fp as f64 - 10.0,
        settle_t0,
        settle_t1,
        ankle_base: 0.25 * cfg.scale,
    };
    let ankle0 = {
        let g = truth::positions(&design.angles_at(0.0), &lengths)[JointId::LAnkle.index()];
        Vec3::new(g.x, g.y, 0.0)
    };
    let wrist = throw_wrist(Handedness::Right);

    let build = |d: &Design| -> Vec<JointAngles> { (0..n).map(|t| d.pose_at(t as f64, &lengths, ankle0)).collect() };
    let mut angles = build(&design);
    let mut positions: Vec<[Vec3; 17]> = angles.iter().map(|q| truth::positions(q, &lengths)).collect();
    let mut br = release_frame(&positions, wrist);
    if let Some(tau) = cfg.targets.trunk_forward_tilt_br {
        let r = limits.theta[coord::LUMBAR + 2];
        let mut settled = false;
        for _ in 0..10 {
            let c = truth::lumbar_pitch_for_tilt(&angles[br], tau);
            if !(r.min..=r.max).contains(&c) {
                return Err(SynthError::InfeasibleTargets(format!("trunk forward tilt {tau} needs lumbar pitch {c:.1}")));
            }
            let cur = design.theta[coord::LUMBAR + 2];
            design.theta[coord::LUMBAR + 2] = through(c, cur.to, br as f64, t0, t1, (r.min, r.max));
            angles = build(&design);
            positions = angles.iter().map(|q| truth::positions(q, &lengths)).collect();
            let next = release_frame(&positions, wrist);
            if next == br {
                settled = true;
                break;
            }
            br = next;
        }
        if !settled {
            return Err(SynthError::InfeasibleTargets("ball release does not settle under the trunk tilt target".into()));
        }
    }
    for (t, q) in angles.iter().enumerate() {
        check_limits(q, &limits, &format!("frame {t}"))?;
    }
    if br <= fp {
        return Err(SynthError::InfeasibleTargets(format!("ball release {br} precedes foot plant {fp}")));
    }
    let mer = (fp + 1..=br)
        .map(|t| (t, rotation_proxy(&angles[t], &lengths, Handedness::Right)))
        .fold((fp + 1, f64::NEG_INFINITY), |best, (t, v)| if v > best.1 { (t, v) } else { best })
        .0;

    let side = cfg.handedness;
    if side == Handedness::Left {
        angles = angles.iter().map(mirror_angles).collect();
    }
    let trajectory: Vec<Vec3> = angles.iter().map(|q| q.root_pos).collect();
    let anchor = Vec3::new(trajectory[0].x, trajectory[0].y, 0.0);
    let per_frame: Vec<[f64; 18]> = angles.iter().map(|q| truth::metrics(q, &lengths, side, anchor)).collect();
    let metrics = MetricName::ALL
        .iter()
        .map(|m| MetricTrack { name: m.name().to_string(), values: per_frame.iter().map(|r| r[m.index()]).collect() })
        .collect();

    let frames: Vec<Frame> = angles.iter().enumerate().map(|(t, q)| Frame::from_positions(frame_time_ms(t, cfg.fps), &fk(q, &lengths))).collect();
    let global = PoseSequence::new(frames, cfg.fps, Space::Global)?;
    let rooted = global.to_pelvis_rooted();
    let truth = GroundTruth {
        handedness: side,
        fps: cfg.fps,
        lengths: lengths.to_vec(),
        angles,
        trajectory,
        events: DeliveryEvents { foot_plant: fp, mer, ball_release: br, confidence_flags: vec![] },
        metrics,
    };
    Ok(Synthesized { global, rooted, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handedness::{assign_roles, classify_handedness};
    use crate::metrics::{compute_all, detect_events, MetricsConfig};

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep7(0.0), 0.0);
        assert_eq!(smoothstep7(1.0), 1.0);
        assert!((smoothstep7(0.5) - 0.5).abs() < 1e-15);
        assert!((smoothstep7(0.3) + smoothstep7(0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_rhp_hits_knee_target() {
        let s = generate(&SynthConfig::default()).unwrap();
        assert_eq!(s.global.len(), 300);
        let fp = s.truth.events.foot_plant;
        assert!((s.truth.metric(MetricName::KneeFlexionLead)[fp] - 45.0).abs() < 1e-12);
    }

    #[test]
    fn stored_angles_reproduce_joints() {
        let s = generate(&SynthConfig { seed: 3, ..Default::default() }).unwrap();
        let l = s.truth.lengths_array();
        for (q, f) in s.truth.angles.iter().zip(s.global.frames()) {
            for (a, b) in truth::positions(q, &l).iter().zip(f.positions().iter()) {
                assert!(a.max_abs_diff(*b) < 1e-9);
            }
        }
        for f in s.rooted.frames() {
            assert_eq!(f.pos(JointId::Pelvis), Vec3::zero());
        }
    }

    #[test]
    fn metrics_module_matches_truth_and_detector_matches_events() {
        for (seed, side) in [(1, Handedness::Right), (2, Handedness::Left), (5, Handedness::Right)] {
            let s = generate(&SynthConfig { seed, handedness: side, ..Default::default() }).unwrap();
            let roles = assign_roles(side);
            let ev = detect_events(&s.global, &roles).unwrap();
            assert_eq!(ev, s.truth.events, "seed {seed}");
            let out = compute_all(&s.global, &roles, &ev, &MetricsConfig::default()).unwrap();
            for m in MetricName::ALL {
                for (a, b) in out.series(m).values.iter().zip(s.truth.metric(m)) {
                    assert!((a - b).abs() < 1e-6, "{m} seed {seed}: {a} vs {b}");
                }
            }
            assert_eq!(classify_handedness(&s.global).unwrap().side, side);
        }
    }

    #[test]
    fn left_is_mirror_of_right() {
        let r = generate(&SynthConfig { seed: 4, ..Default::default() }).unwrap();
        let l = generate(&SynthConfig { seed: 4, handedness: Handedness::Left, ..Default::default() }).unwrap();
        let m = r.global.mirrored();
        for (a, b) in l.global.frames().iter().zip(m.frames()) {
            for j in JointId::ALL {
                assert!(a.pos(j).max_abs_diff(b.pos(j)) < 1e-9);
            }
        }
        for mname in MetricName::ALL {
            for (a, b) in l.truth.metric(mname).iter().zip(r.truth.metric(mname)) {
                assert!((a - b).abs() < 1e-9, "{mname}");
            }
        }
    }

    #[test]
    fn trunk_tilt_target_at_release() {
        let cfg = SynthConfig { seed: 6, targets: SynthTargets { knee_flexion_lead_fp: Some(50.0), trunk_forward_tilt_br: Some(12.0) }, ..Default::default() };
        let s = generate(&cfg).unwrap();
        let br = s.truth.events.ball_release;
        assert!((s.truth.metric(MetricName::TrunkForwardTilt)[br] - 12.0).abs() < 1e-9);
        assert!((s.truth.metric(MetricName::KneeFlexionLead)[s.truth.events.foot_plant] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_invalid_configs() {
        let bad = SynthConfig { targets: SynthTargets { knee_flexion_lead_fp: Some(200.0), ..Default::default() }, ..Default::default() };
        assert!(matches!(generate(&bad), Err(SynthError::InfeasibleTargets(_))));
        assert!(matches!(generate(&SynthConfig { frames: 100, ..Default::default() }), Err(SynthError::Config(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&SynthConfig { seed: 9, ..Default::default() }).unwrap();
        let b = generate(&SynthConfig { seed: 9, ..Default::default() }).unwrap();
        let c = generate(&SynthConfig { seed: 10, ..Default::default() }).unwrap();
        assert_eq!(a.global, b.global);
        assert_ne!(a.global, c.global);
    }

    #[test]
    fn corpus_configs_alternate_and_spread() {
        let base = SynthConfig { seed: 3, ..Default::default() };
        let cfgs: Vec<SynthConfig> = (0..6).map(|i| corpus_config(&base, i, false)).collect();
        for (i, c) in cfgs.iter().enumerate() {
            let want = if i % 2 == 0 { Handedness::Right } else { Handedness::Left };
            assert_eq!(c.handedness, want);
            let k = c.targets.knee_flexion_lead_fp.unwrap();
            assert!((CORPUS_KNEE_RANGE.0..=CORPUS_KNEE_RANGE.1).contains(&k));
        }
        assert_ne!(cfgs[0].seed, cfgs[1].seed);
        assert_eq!(corpus_config(&base, 4, false), cfgs[4]);
        assert_eq!(corpus_config(&base, 2, true).targets, base.targets);
    }
}
