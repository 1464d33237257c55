//! Pitching kinematics from monocular pose estimates: global trajectory
//! lifting, skeletal refinement, biomechanical metrics, handedness and
//! pitcher-level injury-risk analytics.

pub mod analytics;
pub mod geom;
pub mod handedness;
pub mod ingest;
pub mod lifting;
pub mod metrics;
pub mod pose;
pub mod refine;
pub mod savgol;
pub mod scalar;
pub mod synth;

pub use geom::{GeomError, Plane, Vec2};
pub use pose::{Frame, Joint, JointId, PoseSequence, Space, NUM_JOINTS};
pub use scalar::Real;

/// Double-precision vector, the default throughout the pipeline.
pub type Vec3 = geom::Vec3<f64>;
pub type Vec3f32 = geom::Vec3<f32>;
pub type Vec2f64 = geom::Vec2<f64>;
pub type SavitzkyGolay = savgol::SavitzkyGolay<f64>;
