//! Pipeline configuration file. Every section is optional; command-line
//! flags override file values.

use std::path::{Path, PathBuf};

use anyhow::Context;
use pitchkin::analytics::CvConfig;
use pitchkin::lifting::{LiftConfig, DEFAULT_COMMIT, DEFAULT_WINDOW};
use pitchkin::metrics::MetricsConfig;
use pitchkin::refine::RefineConfig;
use pitchkin::synth::{CohortConfig, CorruptConfig, SynthConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftSection {
    /// Predictor used to lift pelvis-rooted input; such input is refined
    /// in place when absent.
    pub predictor: Option<String>,
    pub window: usize,
    pub commit: usize,
}

impl Default for LiftSection {
    fn default() -> Self {
        LiftSection { predictor: None, window: DEFAULT_WINDOW, commit: DEFAULT_COMMIT }
    }
}

impl LiftSection {
    pub fn lift_config(&self) -> LiftConfig {
        LiftConfig { window: self.window, commit: self.commit, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Length unit of pose input files, `ft` or `m`.
    pub unit: Option<String>,
    pub fps: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    /// Feature registry TOML; the built-in registry when absent.
    pub registry: Option<PathBuf>,
    /// Static threshold rules TOML; the built-in rules when absent.
    pub rules: Option<PathBuf>,
    pub lift: LiftSection,
    pub refine: RefineConfig,
    pub metrics: MetricsConfig,
    pub synth: SynthConfig,
    pub corrupt: CorruptConfig,
    pub cohort: CohortConfig,
    pub cv: CvConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // registry paths are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.registry, &mut cfg.rules].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&cfg.registry, &cfg.rules].into_iter().flatten() {
            anyhow::ensure!(p.exists(), "config references missing file {}", p.display());
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse_and_default() {
        let cfg: PipelineConfig = toml::from_str(
            "unit = \"m\"\nseed = 4\n[lift]\npredictor = \"zero\"\n[refine]\nbone_passes = 2\n[cv]\nlambda = 0.05\n",
        )
        .unwrap();
        assert_eq!(cfg.unit.as_deref(), Some("m"));
        assert_eq!(cfg.lift.predictor.as_deref(), Some("zero"));
        assert_eq!(cfg.lift.window, DEFAULT_WINDOW);
        assert_eq!(cfg.refine.bone_passes, 2);
        assert_eq!(cfg.cv.lambda, 0.05);
        assert!(toml::from_str::<PipelineConfig>("bogus = 1").is_err());
    }
}
