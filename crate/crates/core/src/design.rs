//! Regression design vectors for the two visit-level models and the covariate
//! layout conventions shared by simulation and fitting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How the elapsed time enters the progression design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaTransform {
    /// Raw months.
    Raw,
    /// Months minus a centering constant.
    Centered(f64),
    /// log months.
    Log,
}

impl DeltaTransform {
    pub fn apply(self, delta: f64) -> f64 {
        match self {
            DeltaTransform::Raw => delta,
            DeltaTransform::Centered(c) => delta - c,
            DeltaTransform::Log => delta.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelMode {
    /// Gaussian response, raw-delta progression design, no censoring.
    Basic,
    /// Tobit response on [0,1], carry-forward point mass, scale mixtures,
    /// latent-probit binary covariates, log-delta progression design.
    Extended,
}

impl ModelMode {
    pub fn default_delta_transform(self) -> DeltaTransform {
        match self {
            ModelMode::Basic => DeltaTransform::Raw,
            ModelMode::Extended => DeltaTransform::Log,
        }
    }
}

/// Covariate layout shared by a model and the data it explains.
///
/// `p_raw` counts the observed covariates. With `intercept` set, a constant-1
/// coordinate is prepended to the covariate vector before the design formulas
/// are applied, so intercepts live in atom coordinates. The baseline block
/// (X, Y0) always excludes the constant coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateLayout {
    pub p_raw: usize,
    pub intercept: bool,
    /// Indices (into the raw covariates) modeled through latent probits.
    pub binary: Vec<usize>,
    pub delta_transform: DeltaTransform,
}

impl CovariateLayout {
    pub fn basic(p_raw: usize) -> Self {
        CovariateLayout {
            p_raw,
            intercept: true,
            binary: Vec::new(),
            delta_transform: DeltaTransform::Raw,
        }
    }

    pub fn extended(p_raw: usize, binary: Vec<usize>) -> Self {
        CovariateLayout {
            p_raw,
            intercept: true,
            binary,
            delta_transform: DeltaTransform::Log,
        }
    }

    /// Covariate count after the intercept convention is applied.
    pub fn p_model(&self) -> usize {
        self.p_raw + usize::from(self.intercept)
    }

    /// Length of the visit-level design vectors.
    pub fn design_dim(&self) -> usize {
        2 * self.p_model() + 3
    }

    /// Length of the baseline block (raw covariates plus baseline response).
    pub fn baseline_dim(&self) -> usize {
        self.p_raw + 1
    }

    /// Covariate vector in model coordinates ([1, x...] with intercept).
    pub fn model_x(&self, x_raw: &[f64]) -> Vec<f64> {
        assert_eq!(x_raw.len(), self.p_raw, "covariate length");
        if self.intercept {
            let mut v = Vec::with_capacity(self.p_raw + 1);
            v.push(1.0);
            v.extend_from_slice(x_raw);
            v
        } else {
            x_raw.to_vec()
        }
    }
}

/// Recall-time design: [x, y_prev, ln a, x·ln a, y_prev·ln a].
///
/// `x` is the covariate vector in whatever coordinates the caller's model
/// uses; no intercept is added here.
pub fn build_design_x(x: &[f64], y_prev: f64, a: f64) -> Result<Vec<f64>> {
    if a <= 0.0 {
        return Err(Error::domain(format!("recommendation must be positive, got {a}")));
    }
    let mut out = vec![0.0; 2 * x.len() + 3];
    write_design_x(x, y_prev, a, &mut out);
    Ok(out)
}

/// Non-allocating form of [`build_design_x`]; `out` must have length 2p+3.
pub fn write_design_x(x: &[f64], y_prev: f64, a: f64, out: &mut [f64]) {
    let p = x.len();
    debug_assert_eq!(out.len(), 2 * p + 3);
    let la = a.ln();
    out[..p].copy_from_slice(x);
    out[p] = y_prev;
    out[p + 1] = la;
    for j in 0..p {
        out[p + 2 + j] = x[j] * la;
    }
    out[2 * p + 2] = y_prev * la;
}

/// Progression design: [x, y_prev, d, x·d, y_prev·d] with d the transformed
/// elapsed time.
pub fn build_design_z(
    x: &[f64],
    y_prev: f64,
    delta: f64,
    transform: DeltaTransform,
) -> Result<Vec<f64>> {
    if delta <= 0.0 {
        return Err(Error::domain(format!("elapsed time must be positive, got {delta}")));
    }
    let mut out = vec![0.0; 2 * x.len() + 3];
    write_design_z(x, y_prev, delta, transform, &mut out);
    Ok(out)
}

/// Non-allocating form of [`build_design_z`]; `out` must have length 2p+3.
pub fn write_design_z(x: &[f64], y_prev: f64, delta: f64, transform: DeltaTransform, out: &mut [f64]) {
    let p = x.len();
    debug_assert_eq!(out.len(), 2 * p + 3);
    let d = transform.apply(delta);
    out[..p].copy_from_slice(x);
    out[p] = y_prev;
    out[p + 1] = d;
    for j in 0..p {
        out[p + 2 + j] = x[j] * d;
    }
    out[2 * p + 2] = y_prev * d;
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
