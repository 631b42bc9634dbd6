//! Forward simulation of subject histories under a mixture model — the
//! g-computation sampler behind every value and cost estimate.

use crate::design::{dot, write_design_x, write_design_z, ModelMode};
use crate::error::{Error, Result};
use crate::model::{MixtureModel, PosteriorChain};
use crate::policy::{HistoryTail, Policy};
use crate::stats::{norm_cdf, sample_inv_gamma, sample_std_normal};
use crate::trajectory::{Trajectory, VisitRecord};
use nalgebra::{Cholesky, DVector, Dyn};
use rand::{Rng, RngCore};

/// Clamp on sampled log-delta; keeps every delta in [e^-6, e^6] months.
const LOG_DELTA_BOUND: f64 = 6.0;

/// A stochastic (or deterministic) rule for the next recommendation.
pub trait ActionSampler {
    fn sample_action(&self, tail: &HistoryTail, rng: &mut dyn RngCore) -> Result<f64>;
}

/// Fixed recommendation regardless of history (the 6-month standard of care).
#[derive(Debug, Clone, Copy)]
pub struct ConstantAction(pub f64);

impl ActionSampler for ConstantAction {
    fn sample_action(&self, _tail: &HistoryTail, _rng: &mut dyn RngCore) -> Result<f64> {
        if self.0 > 0.0 {
            Ok(self.0)
        } else {
            Err(Error::domain("recommendation must be positive"))
        }
    }
}

/// Training-data behavior: two actions with logit P(short) = y_prev.
#[derive(Debug, Clone, Copy)]
pub struct LogisticBehavior {
    pub short: f64,
    pub long: f64,
}

impl Default for LogisticBehavior {
    fn default() -> Self {
        LogisticBehavior { short: 3.0, long: 9.0 }
    }
}

impl ActionSampler for LogisticBehavior {
    fn sample_action(&self, tail: &HistoryTail, rng: &mut dyn RngCore) -> Result<f64> {
        let p_short = 1.0 / (1.0 + (-tail.y_prev).exp());
        let u: f64 = rng.random();
        Ok(if u < p_short { self.short } else { self.long })
    }
}

impl ActionSampler for Policy {
    fn sample_action(&self, tail: &HistoryTail, _rng: &mut dyn RngCore) -> Result<f64> {
        self.decide(tail)
    }
}

/// A mixture model with the per-simulation quantities precomputed.
pub struct PreparedModel<'a> {
    pub model: &'a MixtureModel,
    sigma0_chol: Cholesky<f64, Dyn>,
    weight_cdf: Vec<f64>,
    theta0_means: Vec<DVector<f64>>,
}

impl<'a> PreparedModel<'a> {
    pub fn new(model: &'a MixtureModel) -> Result<Self> {
        model.validate()?;
        let sigma0_chol = crate::linalg::cholesky_gibbs(&model.sigma0)?;
        let mut cdf = Vec::with_capacity(model.weights.len());
        let mut acc = 0.0;
        for w in &model.weights {
            acc += w;
            cdf.push(acc);
        }
        let theta0_means = model
            .atoms
            .iter()
            .map(|a| DVector::from_column_slice(&a.theta0))
            .collect();
        Ok(PreparedModel { model, sigma0_chol, weight_cdf: cdf, theta0_means })
    }

    fn draw_atom_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.weight_cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.weight_cdf.len() - 1)
    }

    /// Simulate one subject under the given action rule until the cumulative
    /// time reaches the horizon (the crossing visit is retained).
    pub fn sample_subject_with<R: Rng + ?Sized>(
        &self,
        actions: &dyn ActionSampler,
        horizon_months: f64,
        rng: &mut R,
    ) -> Result<Trajectory> {
        if !(horizon_months > 0.0) {
            return Err(Error::domain("horizon must be positive"));
        }
        let m = self.model;
        let extended = m.mode == ModelMode::Extended;
        let atom_idx = self.draw_atom_index(rng);
        let atom = &m.atoms[atom_idx];

        // Baseline (X, Y0); probit coordinates thresholded, Tobit response
        // clamped in extended mode.
        let latent = crate::linalg::sample_mvn(&self.theta0_means[atom_idx], &self.sigma0_chol, rng);
        let p_raw = m.layout.p_raw;
        let mut covariates: Vec<f64> = latent.as_slice()[..p_raw].to_vec();
        if extended {
            for &j in &m.layout.binary {
                covariates[j] = f64::from(latent[j] > 0.0);
            }
        }
        let y0 = if extended { latent[p_raw].clamp(0.0, 1.0) } else { latent[p_raw] };

        let x_model = m.layout.model_x(&covariates);
        let ddim = m.layout.design_dim();
        let mut buf_x = vec![0.0; ddim];
        let mut buf_z = vec![0.0; ddim];
        let sigma1 = m.sigma1_sq.sqrt();
        let sigma2 = m.sigma2_sq.sqrt();

        let mut visits = Vec::new();
        let mut y_prev = y0;
        let mut a_prev: Option<f64> = None;
        let mut delta_prev: Option<f64> = None;
        let mut elapsed = 0.0;
        while elapsed < horizon_months {
            let tail = HistoryTail {
                covariates: &covariates,
                y_prev,
                a_prev,
                delta_prev,
            };
            let a = actions.sample_action(&tail, rng)?;
            if !(a > 0.0) {
                return Err(Error::domain(format!("action sampler returned {a}")));
            }
            write_design_x(&x_model, y_prev, a, &mut buf_x);
            let lambda1 = if extended { sample_inv_gamma(m.nu1 / 2.0, m.nu1 / 2.0, rng) } else { 1.0 };
            let log_delta = (dot(&buf_x, &atom.theta1)
                + (lambda1.sqrt() * sigma1) * sample_std_normal(rng))
            .clamp(-LOG_DELTA_BOUND, LOG_DELTA_BOUND);
            let delta = log_delta.exp();

            write_design_z(&x_model, y_prev, delta, m.layout.delta_transform, &mut buf_z);
            let (y, y_latent, carried) = if extended {
                let theta3 = atom.theta3.as_ref().expect("extended atom has theta3");
                let p_carry = norm_cdf(dot(&buf_z, theta3));
                let u: f64 = rng.random();
                if u < p_carry {
                    (y_prev, None, true)
                } else {
                    let lambda2 = sample_inv_gamma(m.nu2 / 2.0, m.nu2 / 2.0, rng);
                    let y_star = dot(&buf_z, &atom.theta2)
                        + (lambda2 * m.sigma2_sq).sqrt() * sample_std_normal(rng);
                    (y_star.clamp(0.0, 1.0), Some(y_star), false)
                }
            } else {
                let y = dot(&buf_z, &atom.theta2) + sigma2 * sample_std_normal(rng);
                (y, None, false)
            };

            visits.push(VisitRecord { a, delta, y, y_latent, carried_forward: carried });
            elapsed += delta;
            y_prev = y;
            a_prev = Some(a);
            delta_prev = Some(delta);
        }

        Ok(Trajectory { covariates, y0, visits, group_id: None })
    }

    /// Simulate one subject following a deterministic policy.
    pub fn sample_subject<R: Rng + ?Sized>(
        &self,
        policy: &Policy,
        horizon_months: f64,
        rng: &mut R,
    ) -> Result<Trajectory> {
        self.sample_subject_with(policy, horizon_months, rng)
    }
}

/// Where simulated dynamics come from: a fixed model (oracle / single draw)
/// or a posterior chain mixed over draws.
pub enum ModelSource<'a> {
    Fixed(&'a MixtureModel),
    Chain(&'a PosteriorChain),
}

/// Source with every referenced model prepared once.
pub struct PreparedSource<'a> {
    models: Vec<PreparedModel<'a>>,
}

impl<'a> PreparedSource<'a> {
    pub fn new(source: &ModelSource<'a>) -> Result<Self> {
        let models = match source {
            ModelSource::Fixed(m) => vec![PreparedModel::new(m)?],
            ModelSource::Chain(chain) => {
                if chain.draws.is_empty() {
                    return Err(Error::Empty("posterior chain has no draws".into()));
                }
                chain
                    .draws
                    .iter()
                    .map(PreparedModel::new)
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(PreparedSource { models })
    }

    pub fn from_model(m: &'a MixtureModel) -> Result<Self> {
        Self::new(&ModelSource::Fixed(m))
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    /// Draw a subject: posterior draw index sampled uniformly, then the
    /// trajectory simulated from that draw.
    pub fn sample_subject_with<R: Rng + ?Sized>(
        &self,
        actions: &dyn ActionSampler,
        horizon_months: f64,
        rng: &mut R,
    ) -> Result<Trajectory> {
        let k = if self.models.len() == 1 {
            0
        } else {
            rng.random_range(0..self.models.len())
        };
        self.models[k].sample_subject_with(actions, horizon_months, rng)
    }
}
