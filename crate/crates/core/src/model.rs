//! The truncated mixture dynamics model and persisted posterior chains.

use crate::design::{CovariateLayout, ModelMode};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One mixture atom: per-cluster regression coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Baseline mean for (X, Y0); length p_raw + 1.
    pub theta0: Vec<f64>,
    /// Recall-time regression coefficients; length 2·p_model + 3.
    pub theta1: Vec<f64>,
    /// Progression regression coefficients; length 2·p_model + 3.
    pub theta2: Vec<f64>,
    /// Carry-forward probit coefficients (extended mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta3: Option<Vec<f64>>,
}

/// Truncated Dirichlet-process mixture over subject-level coefficients with
/// shared covariance and scale parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub mode: ModelMode,
    pub layout: CovariateLayout,
    pub weights: Vec<f64>,
    pub atoms: Vec<Atom>,
    /// Baseline covariance of (X, Y0); (p_raw+1) x (p_raw+1).
    pub sigma0: DMatrix<f64>,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    /// Scale-mixture degrees of freedom (extended mode).
    pub nu1: f64,
    pub nu2: f64,
}

impl MixtureModel {
    pub fn truncation(&self) -> usize {
        self.atoms.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.atoms.len();
        if l == 0 {
            return Err(Error::Empty("mixture has no atoms".into()));
        }
        if self.weights.len() != l {
            return Err(Error::dim(format!("{} weights for {l} atoms", self.weights.len())));
        }
        let wsum: f64 = self.weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-8 || self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::domain(format!("weights must be a distribution (sum {wsum})")));
        }
        let bdim = self.layout.baseline_dim();
        let ddim = self.layout.design_dim();
        for (i, a) in self.atoms.iter().enumerate() {
            if a.theta0.len() != bdim || a.theta1.len() != ddim || a.theta2.len() != ddim {
                return Err(Error::dim(format!("atom {i} has inconsistent lengths")));
            }
            match (&a.theta3, self.mode) {
                (Some(t3), ModelMode::Extended) if t3.len() == ddim => {}
                (None, ModelMode::Basic) => {}
                (Some(_), ModelMode::Basic) => {
                    return Err(Error::dim(format!("atom {i}: theta3 present in basic mode")));
                }
                (None, ModelMode::Extended) => {
                    return Err(Error::dim(format!("atom {i}: theta3 missing in extended mode")));
                }
                _ => return Err(Error::dim(format!("atom {i}: theta3 length"))),
            }
        }
        if self.sigma0.nrows() != bdim || self.sigma0.ncols() != bdim {
            return Err(Error::dim("sigma0 shape".into()));
        }
        if crate::linalg::cholesky_gibbs(&self.sigma0).is_err() {
            return Err(Error::NotPositiveDefinite("sigma0".into()));
        }
        if self.mode == ModelMode::Extended {
            for &j in &self.layout.binary {
                let d = self.sigma0[(j, j)];
                if (d - 1.0).abs() > 1e-6 {
                    return Err(Error::domain(format!(
                        "latent-probit covariate {j} must have unit variance, got {d}"
                    )));
                }
            }
        }
        // zero variances are admitted for degenerate-simulation checks
        if !(self.sigma1_sq >= 0.0 && self.sigma2_sq >= 0.0 && self.nu1 > 0.0 && self.nu2 > 0.0) {
            return Err(Error::domain("scale parameters must be nonnegative".into()));
        }
        Ok(())
    }
}

pub const CHAIN_SCHEMA_VERSION: u32 = 1;

/// Posterior draws from the Gibbs sampler plus run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub schema_version: u32,
    pub mode: ModelMode,
    pub layout: CovariateLayout,
    pub seed: u64,
    pub n_burnin: usize,
    pub n_kept: usize,
    pub thin: usize,
    pub draws: Vec<MixtureModel>,
    /// Joint log-likelihood of the data at each kept draw.
    pub loglik_trace: Vec<f64>,
}

impl PosteriorChain {
    pub fn validate(&self) -> Result<()> {
        if self.draws.len() != self.n_kept {
            return Err(Error::dim(format!(
                "n_kept {} but {} draws",
                self.n_kept,
                self.draws.len()
            )));
        }
        if self.loglik_trace.iter().any(|x| !x.is_finite()) {
            return Err(Error::NaN("loglik_trace".into()));
        }
        for d in &self.draws {
            d.validate()?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let chain: PosteriorChain = serde_json::from_reader(std::io::BufReader::new(f))?;
        if chain.schema_version != CHAIN_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "chain schema {} unsupported (expected {})",
                chain.schema_version, CHAIN_SCHEMA_VERSION
            )));
        }
        chain.validate()?;
        Ok(chain)
    }
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use crate::design::DeltaTransform;

    /// Single-atom basic model with arbitrary but valid parameters, p_raw = 2.
    pub fn basic_single_atom() -> MixtureModel {
        let layout = CovariateLayout {
            p_raw: 2,
            intercept: true,
            binary: vec![],
            delta_transform: DeltaTransform::Raw,
        };
        let d = layout.design_dim();
        MixtureModel {
            mode: ModelMode::Basic,
            layout,
            weights: vec![1.0],
            atoms: vec![Atom {
                theta0: vec![0.0, 0.0, 0.0],
                theta1: {
                    let mut t = vec![0.0; d];
                    t[4] = 0.9; // ln A
                    t
                },
                theta2: {
                    let mut t = vec![0.0; d];
                    t[0] = 0.1; // intercept
                    t[3] = 0.9; // y_prev
                    t[4] = 0.05; // delta term
                    t
                },
                theta3: None,
            }],
            sigma0: DMatrix::identity(3, 3),
            sigma1_sq: 0.01,
            sigma2_sq: 0.25,
            nu1: 5.0,
            nu2: 5.0,
        }
    }

    #[test]
    fn fixture_validates() {
        basic_single_atom().validate().unwrap();
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut m = basic_single_atom();
        m.weights = vec![0.7];
        assert!(m.validate().is_err());
    }
}
