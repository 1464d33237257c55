//! L1-regularized logistic regression by proximal gradient, with stratified
//! cross-validation and SMOTE inside the training folds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::smote::{smote_oversample, DEFAULT_K};
use super::stats::auc;
use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub max_iters: usize,
    /// Relative objective change that ends the iteration.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iters: 5000, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting from the initial point.
    pub objective: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn linear(w: &[f64], b: f64, x: &[f64]) -> f64 {
    b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()
}

/// Mean logistic loss.
fn loss(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(r, &l)| {
            let z = linear(w, b, r);
            softplus(z) - if l { z } else { 0.0 }
        })
        .sum::<f64>()
        / x.len() as f64
}

fn gradient(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64) -> (Vec<f64>, f64) {
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (r, &l) in x.iter().zip(y) {
        let e = sigmoid(linear(w, b, r)) - if l { 1.0 } else { 0.0 };
        gb += e;
        for (g, v) in gw.iter_mut().zip(r) {
            *g += e * v;
        }
    }
    let n = x.len() as f64;
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

fn l1(w: &[f64]) -> f64 {
    w.iter().map(|v| v.abs()).sum()
}

/// Minimizes mean logistic loss + λ‖w‖₁ (intercept unpenalized) with
/// backtracking proximal gradient steps.
pub fn fit_l1_logistic(x: &[Vec<f64>], y: &[bool], lambda: f64, opts: &FitOptions) -> Result<LogisticFit, AnalyticsError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(AnalyticsError::Shape(format!("{} rows vs {} labels", x.len(), y.len())));
    }
    if !(lambda >= 0.0) {
        return Err(AnalyticsError::Config(format!("lambda must be >= 0, got {lambda}")));
    }
    let d = x[0].len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut f = loss(x, y, &w, b);
    let mut obj = f;
    let mut history = vec![obj];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let (gw, gb) = gradient(x, y, &w, b);
        let (nw, nb, nf) = loop {
            let nw: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| soft_threshold(v - step * g, step * lambda)).collect();
            let nb = b - step * gb;
            let nf = loss(x, y, &nw, nb);
            let dw: Vec<f64> = nw.iter().zip(&w).map(|(a, c)| a - c).collect();
            let db = nb - b;
            let lin = dw.iter().zip(&gw).map(|(a, g)| a * g).sum::<f64>() + db * gb;
            let quad = (dw.iter().map(|v| v * v).sum::<f64>() + db * db) / (2.0 * step);
            if nf <= f + lin + quad + 1e-15 * f.abs() || step < 1e-12 {
                break (nw, nb, nf);
            }
            step *= 0.5;
        };
        let nobj = nf + lambda * l1(&nw);
        debug_assert!(nobj <= obj + 1e-12 * obj.abs().max(1.0), "objective increased: {obj} -> {nobj}");
        let rel = (obj - nobj).abs() / obj.abs().max(1e-12);
        w = nw;
        b = nb;
        f = nf;
        obj = nobj;
        history.push(obj);
        if rel < opts.tol {
            converged = true;
            break;
        }
        step *= 2.0;
    }
    Ok(LogisticFit { weights: w, intercept: b, iterations, converged, objective: history })
}

/// Column-wise z-score computed from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, |r| r.len());
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..d)
            .map(|j| {
                let s = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if s > 1e-12 { s } else { 1.0 }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    /// Probability of the positive class for a raw (unstandardized) row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        sigmoid(linear(&self.weights, self.intercept, &self.standardizer.apply(row)))
    }

    pub fn nonzero(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }

    /// Feature indices by decreasing |weight|.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.weights.len()).collect();
        idx.sort_by(|&a, &b| self.weights[b].abs().total_cmp(&self.weights[a].abs()).then(a.cmp(&b)));
        idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub lambda: f64,
    pub folds: usize,
    pub smote: bool,
    pub smote_k: usize,
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { lambda: 0.01, folds: 5, smote: true, smote_k: DEFAULT_K, seed: 0, fit: FitOptions::default() }
    }
}

/// Independent seed for stream `k`; fold `f` uses stream `f + 1`.
pub fn stream_seed(seed: u64, k: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng.random()
}

/// Fold index per sample; each class is shuffled and dealt round-robin so
/// every fold holds its class share to within one sample.
pub fn stratified_folds(y: &[bool], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut out = vec![0; y.len()];
    for (k, &i) in pos.iter().chain(&neg).enumerate() {
        out[i] = k % folds;
    }
    out
}

fn train(x: &[Vec<f64>], y: &[bool], cfg: &CvConfig, seed: u64) -> Result<LogisticModel, AnalyticsError> {
    let standardizer = Standardizer::fit(x);
    let xs: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
    let (xt, yt) = if cfg.smote { smote_oversample(&xs, y, cfg.smote_k, seed)? } else { (xs, y.to_vec()) };
    let fit = fit_l1_logistic(&xt, &yt, cfg.lambda, &cfg.fit)?;
    if !fit.converged {
        log::warn!("logistic fit stopped at {} iterations without converging", fit.iterations);
    }
    Ok(LogisticModel {
        standardizer,
        weights: fit.weights,
        intercept: fit.intercept,
        lambda: cfg.lambda,
        iterations: fit.iterations,
        converged: fit.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_auc: Vec<f64>,
    pub mean_auc: f64,
    /// Out-of-fold probability per sample.
    pub oof_scores: Vec<f64>,
    pub oof_auc: f64,
    pub non_converged_folds: usize,
    /// Model refit on every sample.
    pub model: LogisticModel,
}

pub fn cross_validate(x: &[Vec<f64>], y: &[bool], cfg: &CvConfig) -> Result<CvResult, AnalyticsError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(AnalyticsError::Shape(format!("{} rows vs {} labels", x.len(), y.len())));
    }
    if cfg.folds < 2 {
        return Err(AnalyticsError::Config("need at least 2 folds".into()));
    }
    let assign = stratified_folds(y, cfg.folds, cfg.seed);
    let per_fold: Vec<(Vec<usize>, Vec<f64>, f64, bool)> = (0..cfg.folds)
        .into_par_iter()
        .map(|f| {
            let (test, trn): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| assign[i] == f);
            let ty: Vec<bool> = test.iter().map(|&i| y[i]).collect();
            let ry: Vec<bool> = trn.iter().map(|&i| y[i]).collect();
            for labels in [&ty, &ry] {
                if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
                    return Err(AnalyticsError::SingleClassFold(f));
                }
            }
            let rx: Vec<Vec<f64>> = trn.iter().map(|&i| x[i].clone()).collect();
            let model = train(&rx, &ry, cfg, stream_seed(cfg.seed, f as u64 + 1))?;
            let scores: Vec<f64> = test.iter().map(|&i| model.predict(&x[i])).collect();
            let a = auc(&scores, &ty)?;
            Ok((test, scores, a, model.converged))
        })
        .collect::<Result<_, _>>()?;
    let mut oof_scores = vec![0.0; y.len()];
    let mut fold_auc = Vec::with_capacity(cfg.folds);
    let mut non_converged_folds = 0;
    for (test, scores, a, conv) in per_fold {
        for (i, s) in test.into_iter().zip(scores) {
            oof_scores[i] = s;
        }
        fold_auc.push(a);
        non_converged_folds += usize::from(!conv);
    }
    let mean_auc = fold_auc.iter().sum::<f64>() / fold_auc.len() as f64;
    let oof_auc = auc(&oof_scores, y)?;
    let model = train(x, y, cfg, stream_seed(cfg.seed, 0))?;
    Ok(CvResult { fold_auc, mean_auc, oof_scores, oof_auc, non_converged_folds, model })
}

/// Cross-validated fit: the refit model plus per-fold AUC.
pub fn train_l1_logistic(x: &[Vec<f64>], y: &[bool], lambda: f64, folds: usize, seed: u64) -> Result<(LogisticModel, Vec<f64>), AnalyticsError> {
    let cfg = CvConfig { lambda, folds, seed, ..CvConfig::default() };
    let r = cross_validate(x, y, &cfg)?;
    Ok((r.model, r.fold_auc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn planted(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..6).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let y = x.iter().map(|r| 2.5 * r[3] + { let e: f64 = StandardNormal.sample(&mut rng); 0.3 * e } > 0.0).collect();
        (x, y)
    }

    #[test]
    fn separable_toy_training_auc_is_one() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.2, 0.8], vec![3.0, 3.0], vec![4.0, 2.5], vec![3.5, 4.0]];
        let y = vec![false, false, false, true, true, true];
        let fit = fit_l1_logistic(&x, &y, 0.0, &FitOptions::default()).unwrap();
        let s: Vec<f64> = x.iter().map(|r| linear(&fit.weights, fit.intercept, r)).collect();
        assert_eq!(auc(&s, &y).unwrap(), 1.0);
    }

    #[test]
    fn large_lambda_zeroes_weights() {
        let (x, y) = planted(60, 1);
        let fit = fit_l1_logistic(&x, &y, 1e3, &FitOptions::default()).unwrap();
        assert!(fit.weights.iter().all(|w| *w == 0.0));
        let s: Vec<f64> = x.iter().map(|r| linear(&fit.weights, fit.intercept, r)).collect();
        assert_eq!(auc(&s, &y).unwrap(), 0.5);
    }

    #[test]
    fn objective_monotone() {
        let (x, y) = planted(80, 2);
        let fit = fit_l1_logistic(&x, &y, 0.02, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        for w in fit.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn informative_feature_ranks_first() {
        let (x, y) = planted(200, 3);
        let (model, folds) = train_l1_logistic(&x, &y, 0.01, 5, 11).unwrap();
        assert_eq!(model.ranking()[0], 3);
        assert_eq!(folds.len(), 5);
        assert!(folds.iter().sum::<f64>() / 5.0 > 0.9);
    }

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let y: Vec<bool> = (0..103).map(|i| i % 10 == 0).collect();
        let f = stratified_folds(&y, 5, 4);
        assert_eq!(f, stratified_folds(&y, 5, 4));
        let total_pos = y.iter().filter(|&&l| l).count() as f64;
        for k in 0..5 {
            let pos = (0..y.len()).filter(|&i| f[i] == k && y[i]).count() as f64;
            assert!((pos - total_pos / 5.0).abs() <= 1.0);
        }
    }

    #[test]
    fn cv_is_deterministic() {
        let (x, y) = planted(100, 5);
        let cfg = CvConfig { seed: 8, ..CvConfig::default() };
        assert_eq!(cross_validate(&x, &y, &cfg).unwrap(), cross_validate(&x, &y, &cfg).unwrap());
    }

    #[test]
    fn single_class_fold_errors() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let mut y = vec![false; 10];
        y[0] = true;
        y[1] = true;
        let cfg = CvConfig { smote: false, ..CvConfig::default() };
        assert!(matches!(cross_validate(&x, &y, &cfg), Err(AnalyticsError::SingleClassFold(_))));
    }
}
