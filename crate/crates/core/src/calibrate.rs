//! Cost-constraint calibration: find the risk threshold at which a policy's
//! expected recommendation matches the target.

use crate::dynamics::{ConstantAction, PreparedSource};
use crate::error::{Error, Result};
use crate::loess::{invert_monotone, loess_fit, pav_nondecreasing};
use crate::policy::{FeatureSpec, HistoryTail, Policy};
use crate::seeds;
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const GRID_SIZE: usize = 10;
pub const DEFAULT_LOESS_SPAN: f64 = 0.75;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub kappa: f64,
    pub cost_raw: f64,
    pub cost_smooth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub kappa: f64,
    /// Smoothed cost at the returned threshold.
    pub expected_cost: f64,
    /// Target was outside the achievable cost range; nearest endpoint used.
    pub clamped: bool,
    pub grid: Vec<CalibrationPoint>,
    pub score_range: (f64, f64),
}

/// Risk scores at every decision point of a trajectory.
pub fn decision_scores(
    traj: &Trajectory,
    spec: &FeatureSpec,
    alpha: &[f64],
) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; spec.q()];
    let mut out = Vec::with_capacity(traj.visits.len());
    let mut y_prev = traj.y0;
    let mut a_prev = None;
    let mut delta_prev = None;
    for v in &traj.visits {
        let tail = HistoryTail {
            covariates: &traj.covariates,
            y_prev,
            a_prev,
            delta_prev,
        };
        spec.extract_into(&tail, &mut buf)?;
        out.push(crate::design::dot(alpha, &buf));
        y_prev = v.y;
        a_prev = Some(v.a);
        delta_prev = Some(v.delta);
    }
    Ok(out)
}

/// Risk-score range spanned by observed training trajectories.
pub fn training_score_range(
    trajectories: &[Trajectory],
    spec: &FeatureSpec,
    alpha: &[f64],
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in trajectories {
        for s in decision_scores(t, spec, alpha)? {
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    if lo.is_finite() && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(Error::Empty("no decision points in training data".into()))
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Mean per-subject recommendation under a policy, over `n1` subjects.
fn expected_cost(
    source: &PreparedSource,
    policy: &Policy,
    n1: usize,
    horizon: f64,
    seed: u64,
) -> Result<f64> {
    let costs: Vec<f64> = (0..n1)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = seeds::child_rng(seed, i as u64);
            let traj = source.sample_subject_with(policy, horizon, &mut rng)?;
            Ok(traj.visits.iter().map(|v| v.a).sum::<f64>() / traj.visits.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(costs.iter().sum::<f64>() / costs.len() as f64)
}

/// Calibrate the threshold so the policy's expected mean recommendation hits
/// `target_cost`.
///
/// Ten candidate thresholds span the risk-score range (supplied from training
/// data, or estimated here as the 1st-99th percentile of scores under a
/// constant-`target_cost` reference policy). Costs are estimated with `n1`
/// subjects each, smoothed by LOESS, repaired to monotone by
/// pool-adjacent-violators, and inverted piecewise-linearly.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_threshold(
    source: &PreparedSource,
    feature_spec: &FeatureSpec,
    alpha: &[f64],
    a1: f64,
    a2: f64,
    target_cost: f64,
    n1: usize,
    horizon: f64,
    score_range: Option<(f64, f64)>,
    loess_span: f64,
    seed: u64,
) -> Result<Calibration> {
    if n1 == 0 {
        return Err(Error::Empty("n1 must be at least 1".into()));
    }
    let (lo, hi) = match score_range {
        Some(r) => r,
        None => {
            let reference = ConstantAction(target_cost);
            let mut scores = Vec::new();
            for i in 0..n1 {
                let mut rng = seeds::child_rng(seed, 7_000_000 + i as u64);
                let traj = source.sample_subject_with(&reference, horizon, &mut rng)?;
                scores.extend(decision_scores(&traj, feature_spec, alpha)?);
            }
            scores.sort_by(f64::total_cmp);
            (quantile(&scores, 0.01), quantile(&scores, 0.99))
        }
    };
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };

    let kappas: Vec<f64> = (0..GRID_SIZE)
        .map(|g| lo + (hi - lo) * g as f64 / (GRID_SIZE - 1) as f64)
        .collect();
    let costs_raw: Vec<f64> = kappas
        .iter()
        .enumerate()
        .map(|(g, &kappa)| {
            let policy = Policy {
                alpha: alpha.to_vec(),
                kappa,
                a1,
                a2,
                feature_spec: feature_spec.clone(),
                calibration: None,
            };
            policy.validate()?;
            expected_cost(source, &policy, n1, horizon, seeds::child(seed, 1000 + g as u64))
        })
        .collect::<Result<Vec<_>>>()?;

    let smooth = loess_fit(&kappas, &costs_raw, loess_span);
    let smooth = pav_nondecreasing(&smooth);
    let (kappa, clamped) = invert_monotone(&kappas, &smooth, target_cost);
    let expected = {
        let (idx, _) = kappas
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - kappa).abs().total_cmp(&(*b - kappa).abs()))
            .unwrap();
        if clamped {
            smooth[idx]
        } else {
            target_cost
        }
    };
    let grid = kappas
        .iter()
        .zip(costs_raw.iter())
        .zip(smooth.iter())
        .map(|((&k, &r), &s)| CalibrationPoint { kappa: k, cost_raw: r, cost_smooth: s })
        .collect();
    Ok(Calibration { kappa, expected_cost: expected, clamped, grid, score_range: (lo, hi) })
}
