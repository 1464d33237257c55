//! Projected damped Gauss-Newton inverse kinematics with box limits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kinematics::{fk, fk_full, initial_angles, jacobian, JointAngles, NUM_PARAMS};
use super::skeleton::SkeletonModel;
use crate::geom::Vec3;
use crate::pose::NUM_JOINTS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkOptions {
    pub damping: f64,
    pub max_iters: usize,
    /// Convergence threshold on the angular step (degrees).
    pub step_tol_deg: f64,
    /// Convergence threshold on the translational step (ft).
    pub step_tol_ft: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self { damping: 1e-3, max_iters: 50, step_tol_deg: 1e-4, step_tol_ft: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkResult {
    pub angles: JointAngles,
    pub positions: [Vec3; NUM_JOINTS],
    /// Weighted residual norm after each accepted iterate, starting with the
    /// initial guess.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl IkResult {
    pub fn residual(&self) -> f64 {
        *self.history.last().expect("history holds the initial residual")
    }

    pub fn into_result(self) -> Result<IkResult, IkError> {
        if self.converged {
            Ok(self)
        } else {
            Err(IkError::NonConvergence { residual: self.residual(), best: Box::new(self) })
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IkError {
    #[error("IK did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64, best: Box<IkResult> },
}

fn weighted_residual(target: &[Vec3; NUM_JOINTS], pos: &[Vec3; NUM_JOINTS], w: &[f64; NUM_JOINTS]) -> (Vec<f64>, f64) {
    let mut r = Vec::with_capacity(3 * NUM_JOINTS);
    let mut cost = 0.0;
    for j in 0..NUM_JOINTS {
        let d = target[j] - pos[j];
        for a in 0..3 {
            r.push(d[a]);
        }
        cost += w[j] * d.norm_squared();
    }
    (r, cost.sqrt())
}

/// Fits generalized coordinates to `target` by minimizing
/// `Σ w_j‖FK(θ)_j − target_j‖²` inside the joint box.
pub fn ik_fit(target: &[Vec3; NUM_JOINTS], skel: &SkeletonModel, init: Option<JointAngles>, opts: &IkOptions) -> IkResult {
    let lim = &skel.limits;
    let bounds = JointAngles::bounds(lim);
    let mut q = init.unwrap_or_else(|| initial_angles(target, &skel.lengths, lim));
    q.clamp(lim);
    let w = &skel.weights;

    let mut fkr = fk_full(&q, &skel.lengths);
    let (mut r, mut cost) = weighted_residual(target, &fkr.positions, w);
    let mut history = vec![cost];
    let mut converged = false;
    let mut iterations = 0;
    let mut lambda = opts.damping;

    // angular parameters are solved in radians for conditioning
    let scale = |k: usize| if k < 3 { 1.0 } else { 1.0f64.to_degrees() };

    while iterations < opts.max_iters {
        iterations += 1;
        let jac = jacobian(&fkr);
        let mut jtj = DMatrix::<f64>::zeros(NUM_PARAMS, NUM_PARAMS);
        let mut g = DVector::<f64>::zeros(NUM_PARAMS);
        for (row, (jr, rv)) in jac.iter().zip(&r).enumerate() {
            let wj = w[row / 3];
            if wj == 0.0 {
                continue;
            }
            for a in 0..NUM_PARAMS {
                if jr[a] == 0.0 {
                    continue;
                }
                g[a] += wj * jr[a] * rv;
                for b in a..NUM_PARAMS {
                    jtj[(a, b)] += wj * jr[a] * jr[b];
                }
            }
        }
        for a in 0..NUM_PARAMS {
            for b in 0..a {
                jtj[(a, b)] = jtj[(b, a)];
            }
        }

        // active set: coordinates pinned at a bound with the gradient pushing out
        let p = q.to_params();
        let free: Vec<usize> = (0..NUM_PARAMS)
            .filter(|&k| {
                let (lo, hi) = bounds[k];
                let pinned = lo == hi || (p[k] <= lo && g[k] < 0.0) || (p[k] >= hi && g[k] > 0.0);
                !pinned
            })
            .collect();
        if free.is_empty() {
            converged = true;
            break;
        }

        let mut accepted = false;
        let mut small_step = false;
        for _ in 0..10 {
            let n = free.len();
            let a = DMatrix::from_fn(n, n, |i, j| jtj[(free[i], free[j])] + if i == j { lambda } else { 0.0 });
            let b = DVector::from_fn(n, |i, _| g[free[i]]);
            let Some(delta) = a.cholesky().map(|c| c.solve(&b)) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand = p;
            for (i, &k) in free.iter().enumerate() {
                cand[k] = (p[k] + delta[i] * scale(k)).clamp(bounds[k].0, bounds[k].1);
            }
            let (mut ang, mut lin) = (0.0f64, 0.0f64);
            for k in 0..NUM_PARAMS {
                let d = cand[k] - p[k];
                if k < 3 {
                    lin += d * d;
                } else {
                    ang += d * d;
                }
            }
            small_step = ang.sqrt() < opts.step_tol_deg && lin.sqrt() < opts.step_tol_ft;
            let cq = JointAngles::from_params(&cand);
            let cfk = fk_full(&cq, &skel.lengths);
            let (cr, ccost) = weighted_residual(target, &cfk.positions, w);
            if ccost <= cost {
                q = cq;
                fkr = cfk;
                r = cr;
                cost = ccost;
                history.push(cost);
                lambda = (lambda / 10.0).max(opts.damping);
                accepted = true;
                break;
            }
            if small_step {
                break;
            }
            lambda *= 10.0;
        }
        if small_step || !accepted {
            converged = small_step || cost == 0.0;
            break;
        }
    }

    IkResult { positions: fk(&q, &skel.lengths), angles: q, history, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::JointId;
    use crate::refine::skeleton::coord;

    fn pitch_pose() -> JointAngles {
        let mut q = JointAngles::rest(Vec3::new(1.0, -0.5, 3.0));
        q.root_orient = [-95.0, 4.0, 0.0];
        q.theta[coord::LUMBAR..coord::LUMBAR + 3].copy_from_slice(&[30.0, -8.0, -25.0]);
        q.theta[coord::L_HIP..coord::L_HIP + 3].copy_from_slice(&[5.0, 10.0, -50.0]);
        q.theta[coord::L_KNEE] = 45.0;
        q.theta[coord::R_KNEE] = 20.0;
        q.theta[coord::R_SHOULDER..coord::R_SHOULDER + 3].copy_from_slice(&[90.0, -10.0, 95.0]);
        q.theta[coord::R_ELBOW] = 90.0;
        q.theta[coord::L_ELBOW] = 60.0;
        q
    }

    #[test]
    fn exact_target_converges_to_zero_residual() {
        let m = SkeletonModel::default();
        let target = fk(&pitch_pose(), &m.lengths);
        // start from the rest pose to exercise the iteration
        let res = ik_fit(&target, &m, Some(JointAngles::rest(target[JointId::Pelvis.index()])), &IkOptions::default());
        assert!(res.residual() < 1e-8, "residual {} history {:?}", res.residual(), res.history);
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(res.angles.limit_violation(&m.limits) == 0.0);
    }

    #[test]
    fn limits_hold_for_unreachable_targets() {
        let m = SkeletonModel::default();
        let mut q = pitch_pose();
        q.theta[coord::L_KNEE] = 0.0;
        let mut target = fk(&q, &m.lengths);
        // hyperextended knee: push the ankle forward past straight
        let k = target[JointId::LKnee.index()];
        let a = target[JointId::LAnkle.index()];
        let thigh = (k - target[JointId::LHip.index()]) / 1.45;
        let side = thigh.cross(Vec3::unit_z()).try_normalize().unwrap();
        target[JointId::LAnkle.index()] = k + ((a - k) / 1.45 * 0.94 + side.cross(thigh) * 0.34) * 1.45;
        let res = ik_fit(&target, &m, None, &IkOptions::default());
        assert!(res.angles.limit_violation(&m.limits) <= 1e-6);
        assert!(res.residual() > 1e-3);
    }

    #[test]
    fn noisy_targets_do_not_increase_residual() {
        use rand::{Rng, SeedableRng};
        let m = SkeletonModel::default();
        let clean = fk(&pitch_pose(), &m.lengths);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut noisy = clean;
        for p in noisy.iter_mut() {
            *p += Vec3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
        }
        let init = initial_angles(&noisy, &m.lengths, &m.limits);
        let res = ik_fit(&noisy, &m, Some(init), &IkOptions::default());
        assert!(res.residual() <= res.history[0]);
        assert!(res.converged);
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = SkeletonModel::default();
        let target = fk(&pitch_pose(), &m.lengths);
        let opts = IkOptions { max_iters: 1, ..IkOptions::default() };
        let res = ik_fit(&target, &m, Some(JointAngles::rest(Vec3::zero())), &opts);
        assert!(!res.converged);
        assert!(matches!(res.into_result(), Err(IkError::NonConvergence { .. })));
    }
}
