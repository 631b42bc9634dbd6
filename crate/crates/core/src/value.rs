//! Utilities and Monte-Carlo value / cost estimation under a model source.

use crate::dynamics::{ActionSampler, PreparedSource};
use crate::error::{Error, Result};
use crate::seeds;
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    /// Negative mean response over follow-up visits within the horizon.
    Average,
    /// Baseline minus the (interpolated) response at the horizon.
    Reduction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub horizon_months: f64,
}

impl UtilitySpec {
    pub fn average() -> Self {
        UtilitySpec { kind: UtilityKind::Average, horizon_months: 60.0 }
    }

    pub fn reduction() -> Self {
        UtilitySpec { kind: UtilityKind::Reduction, horizon_months: 60.0 }
    }
}

/// Utility of one trajectory. The trajectory must span the horizon.
pub fn utility(traj: &Trajectory, spec: &UtilitySpec) -> Result<f64> {
    let horizon = spec.horizon_months;
    if traj.visits.is_empty() {
        return Err(Error::Empty("trajectory has no follow-up visits".into()));
    }
    match spec.kind {
        UtilityKind::Average => {
            let mut sum = 0.0;
            let mut n = 0usize;
            let mut t = 0.0;
            for v in &traj.visits {
                t += v.delta;
                sum += v.y;
                n += 1;
                if t >= horizon {
                    break;
                }
            }
            if t < horizon {
                return Err(Error::domain(format!(
                    "trajectory ends at {t} months, before the {horizon}-month horizon"
                )));
            }
            Ok(-sum / n as f64)
        }
        UtilityKind::Reduction => {
            let mut t_prev = 0.0;
            let mut y_prev = traj.y0;
            for v in &traj.visits {
                let t = t_prev + v.delta;
                if t >= horizon {
                    let y_at = if t == horizon {
                        v.y
                    } else {
                        let w = (horizon - t_prev) / v.delta;
                        y_prev + w * (v.y - y_prev)
                    };
                    return Ok(traj.y0 - y_at);
                }
                t_prev = t;
                y_prev = v.y;
            }
            Err(Error::domain(format!(
                "trajectory ends at {t_prev} months, before the {horizon}-month horizon"
            )))
        }
    }
}

/// Monte-Carlo estimate of a policy's value and cost.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_subjects: usize,
    /// Mean over subjects of the per-subject mean recommended months.
    pub cost: f64,
    pub cost_std_error: f64,
    pub seed: u64,
}

/// Simulate `n2` subjects under the action rule, returning mean utility and
/// mean recommendation with standard errors.
///
/// Per-subject RNG streams are derived from `seed`, so the result does not
/// depend on the parallel partition.
pub fn estimate_value(
    source: &PreparedSource,
    actions: &(dyn ActionSampler + Sync),
    spec: &UtilitySpec,
    n2: usize,
    seed: u64,
) -> Result<ValueEstimate> {
    if n2 == 0 {
        return Err(Error::Empty("n2 must be at least 1".into()));
    }
    let rows: Vec<(f64, f64)> = (0..n2)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut rng = seeds::child_rng(seed, i as u64);
            let traj = source.sample_subject_with(actions, spec.horizon_months, &mut rng)?;
            let u = utility(&traj, spec)?;
            let mean_a =
                traj.visits.iter().map(|v| v.a).sum::<f64>() / traj.visits.len() as f64;
            Ok((u, mean_a))
        })
        .collect::<Result<Vec<_>>>()?;
    let utils: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let costs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (value, std_error) = crate::stats::mean_se(&utils);
    let (cost, cost_std_error) = crate::stats::mean_se(&costs);
    if !value.is_finite() {
        return Err(Error::NaN("value estimate".into()));
    }
    Ok(ValueEstimate { value, std_error, n_subjects: n2, cost, cost_std_error, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ConstantAction, ModelSource, PreparedSource};
    use crate::model::test_fixtures::basic_single_atom;
    use crate::trajectory::VisitRecord;
    use approx::assert_abs_diff_eq;

    fn traj(y0: f64, visits: &[(f64, f64)]) -> Trajectory {
        Trajectory {
            covariates: vec![0.0, 0.0],
            y0,
            visits: visits
                .iter()
                .map(|&(delta, y)| VisitRecord {
                    a: 6.0,
                    delta,
                    y,
                    y_latent: None,
                    carried_forward: false,
                })
                .collect(),
            group_id: None,
        }
    }

    #[test]
    fn reduction_zero_when_constant() {
        let t = traj(0.2, &[(30.0, 0.2), (31.0, 0.2)]);
        let u = utility(&t, &UtilitySpec::reduction()).unwrap();
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn reduction_midpoint_interpolation() {
        // visits at months 50 (y = 0.2) and 70 (y = 0.4), y0 = 0.5:
        // interpolated y(60) = 0.3, utility = 0.2
        let t = traj(0.5, &[(50.0, 0.2), (20.0, 0.4)]);
        let u = utility(&t, &UtilitySpec::reduction()).unwrap();
        assert_abs_diff_eq!(u, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn reduction_uses_exact_visit_at_horizon() {
        let t = traj(0.5, &[(60.0, 0.1)]);
        let u = utility(&t, &UtilitySpec::reduction()).unwrap();
        assert_abs_diff_eq!(u, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn average_single_visit() {
        let t = traj(0.0, &[(61.0, -3.0)]);
        let u = utility(&t, &UtilitySpec::average()).unwrap();
        assert_abs_diff_eq!(u, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn short_trajectory_is_an_error() {
        let t = traj(0.0, &[(10.0, 1.0)]);
        assert!(utility(&t, &UtilitySpec::average()).is_err());
        assert!(utility(&t, &UtilitySpec::reduction()).is_err());
    }

    #[test]
    fn estimate_is_seed_deterministic_and_cost_exact_for_constant_action() {
        let m = basic_single_atom();
        let source = PreparedSource::new(&ModelSource::Fixed(&m)).unwrap();
        let a = ConstantAction(6.0);
        let e1 = estimate_value(&source, &a, &UtilitySpec::average(), 500, 99).unwrap();
        let e2 = estimate_value(&source, &a, &UtilitySpec::average(), 500, 99).unwrap();
        assert_eq!(e1.value, e2.value);
        assert_abs_diff_eq!(e1.cost, 6.0, epsilon = 1e-12);
        assert!(e1.std_error > 0.0);
    }

    #[test]
    fn single_draw_chain_matches_fixed_model() {
        let m = basic_single_atom();
        let chain = crate::model::PosteriorChain {
            schema_version: crate::model::CHAIN_SCHEMA_VERSION,
            mode: m.mode,
            layout: m.layout.clone(),
            seed: 0,
            n_burnin: 0,
            n_kept: 1,
            thin: 1,
            draws: vec![m.clone()],
            loglik_trace: vec![0.0],
        };
        let s_fixed = PreparedSource::new(&ModelSource::Fixed(&m)).unwrap();
        let s_chain = PreparedSource::new(&ModelSource::Chain(&chain)).unwrap();
        let a = ConstantAction(6.0);
        let e1 = estimate_value(&s_fixed, &a, &UtilitySpec::average(), 300, 7).unwrap();
        let e2 = estimate_value(&s_chain, &a, &UtilitySpec::average(), 300, 7).unwrap();
        assert_eq!(e1.value, e2.value, "one-draw chain must reproduce oracle exactly");
    }
}
