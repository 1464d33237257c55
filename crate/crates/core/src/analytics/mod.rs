//! Pitcher-level features, static flags, the L1-logistic risk model and
//! validation statistics.

pub mod aggregate;
pub mod logistic;
pub mod rules;
pub mod smote;
pub mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aggregate::{aggregate_pitcher, impute_median, summary, FeatureRegistry, PitcherProfile};
pub use logistic::{cross_validate, train_l1_logistic, CvConfig, CvResult, LogisticModel};
pub use rules::{static_flags, Rule, RuleSet};
pub use smote::smote_oversample;
pub use stats::{auc, cohens_d, pearson, validation_stats, ValidationStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("no pitches to aggregate")]
    EmptyInput,
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("pitcher {pitcher}: missing {metric} at {event}")]
    MissingMetric { pitcher: String, metric: String, event: String },
    #[error("minority class has {0} members, need at least 2")]
    TooFewMinority(usize),
    #[error("only one class present")]
    SingleClass,
    #[error("fold {0} has a single class")]
    SingleClassFold(usize),
    #[error("zero variance")]
    ZeroVariance,
    #[error("need at least {need} samples per group, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("no paired values")]
    NoPairs,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    TommyJohn,
    ArmInjury,
}

impl Target {
    pub fn label(self, p: &PitcherProfile) -> bool {
        match self {
            Target::TommyJohn => p.meta.label_tj,
            Target::ArmInjury => p.meta.label_arm_injury,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub pitcher_id: String,
    pub flags: Vec<String>,
    /// Out-of-fold probability.
    pub score: f64,
    pub fold_auc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub target: Target,
    pub reports: Vec<RiskReport>,
    pub fold_auc: Vec<f64>,
    pub mean_auc: f64,
    pub oof_auc: f64,
    pub non_converged_folds: usize,
    /// Features with nonzero weight in the refit model, by decreasing |weight|.
    pub selected: Vec<(String, f64)>,
}

/// Flags every profile and scores it with out-of-fold L1-logistic
/// probabilities. Profiles must already be imputed.
pub fn screen(profiles: &[PitcherProfile], reg: &FeatureRegistry, rules: &[Rule], target: Target, cfg: &CvConfig) -> Result<ScreenReport, AnalyticsError> {
    if profiles.iter().any(|p| p.feature_vector.iter().any(|v| !v.is_finite())) {
        return Err(AnalyticsError::Config("profiles contain non-finite features; impute first".into()));
    }
    let x: Vec<Vec<f64>> = profiles.iter().map(|p| p.feature_vector.clone()).collect();
    let y: Vec<bool> = profiles.iter().map(|p| target.label(p)).collect();
    let cv = cross_validate(&x, &y, cfg)?;
    let reports = profiles
        .iter()
        .zip(&cv.oof_scores)
        .map(|(p, &score)| {
            Ok(RiskReport { pitcher_id: p.meta.pitcher_id.clone(), flags: static_flags(p, reg, rules)?, score, fold_auc: cv.fold_auc.clone() })
        })
        .collect::<Result<_, AnalyticsError>>()?;
    let selected = cv
        .model
        .ranking()
        .into_iter()
        .filter(|&i| cv.model.weights[i] != 0.0)
        .map(|i| (reg.features[i].clone(), cv.model.weights[i]))
        .collect();
    Ok(ScreenReport {
        target,
        reports,
        fold_auc: cv.fold_auc,
        mean_auc: cv.mean_auc,
        oof_auc: cv.oof_auc,
        non_converged_folds: cv.non_converged_folds,
        selected,
    })
}
