//! Linear-risk-score recall policies: feature extraction, scoring, decisions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The information a policy sees when recommending the next visit time.
#[derive(Debug, Clone, Copy)]
pub struct HistoryTail<'a> {
    pub covariates: &'a [f64],
    pub y_prev: f64,
    /// Previous recommendation; `None` at the first decision.
    pub a_prev: Option<f64>,
    /// Previous elapsed time; `None` at the first decision.
    pub delta_prev: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Feature {
    Covariate { index: usize },
    CovariateScaled { index: usize, scale: f64 },
    /// log(|delta_prev - a_prev| + 1)
    Noncompliance,
    CurrentResponseScaled { scale: f64 },
}

/// Ordered feature list plus the first-decision defaults for (A_0, delta_0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub features: Vec<Feature>,
    pub default_a0: f64,
    pub default_delta0: f64,
}

impl FeatureSpec {
    pub fn q(&self) -> usize {
        self.features.len()
    }

    /// The q=4 benchmark score: X1, X2, noncompliance, Y_prev.
    pub fn benchmark() -> Self {
        FeatureSpec {
            features: vec![
                Feature::Covariate { index: 0 },
                Feature::Covariate { index: 1 },
                Feature::Noncompliance,
                Feature::CurrentResponseScaled { scale: 1.0 },
            ],
            default_a0: 6.0,
            default_delta0: 6.0,
        }
    }

    /// Published fitted-policy score: age, diabetes, noncompliance, 10·Y_prev,
    /// over a 6-covariate layout (age index 2, diabetes index 3).
    pub fn published_q4() -> Self {
        FeatureSpec {
            features: vec![
                Feature::Covariate { index: 2 },
                Feature::Covariate { index: 3 },
                Feature::Noncompliance,
                Feature::CurrentResponseScaled { scale: 10.0 },
            ],
            default_a0: 6.0,
            default_delta0: 6.0,
        }
    }

    pub fn extract_into(&self, tail: &HistoryTail, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.features.len());
        let a_prev = tail.a_prev.unwrap_or(self.default_a0);
        let d_prev = tail.delta_prev.unwrap_or(self.default_delta0);
        for (k, f) in self.features.iter().enumerate() {
            out[k] = match *f {
                Feature::Covariate { index } => *tail
                    .covariates
                    .get(index)
                    .ok_or_else(|| Error::dim(format!("feature covariate({index}) out of range")))?,
                Feature::CovariateScaled { index, scale } => {
                    scale
                        * *tail.covariates.get(index).ok_or_else(|| {
                            Error::dim(format!("feature covariate({index}) out of range"))
                        })?
                }
                Feature::Noncompliance => ((d_prev - a_prev).abs() + 1.0).ln(),
                Feature::CurrentResponseScaled { scale } => scale * tail.y_prev,
            };
        }
        Ok(())
    }

    pub fn extract(&self, tail: &HistoryTail) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.q()];
        self.extract_into(tail, &mut out)?;
        Ok(out)
    }
}

/// Normalize feature weights to the unit sphere, preserving direction.
pub fn normalize_weights(alpha_raw: &[f64]) -> Result<Vec<f64>> {
    let norm = alpha_raw.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::domain("cannot normalize zero or non-finite weights".into()));
    }
    Ok(alpha_raw.iter().map(|a| a / norm).collect())
}

/// Calibration metadata persisted alongside a policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMeta {
    pub target_cost: f64,
    pub n1: usize,
    pub seed: u64,
}

/// Two-action threshold policy on a linear risk score.
///
/// Recommends `a1` when the score strictly exceeds `kappa`, `a2` otherwise
/// (ties go to `a2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub alpha: Vec<f64>,
    pub kappa: f64,
    pub a1: f64,
    pub a2: f64,
    pub feature_spec: FeatureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationMeta>,
}

impl Policy {
    pub fn new(
        alpha: Vec<f64>,
        kappa: f64,
        a1: f64,
        a2: f64,
        feature_spec: FeatureSpec,
    ) -> Result<Self> {
        let p = Policy { alpha, kappa, a1, a2, feature_spec, calibration: None };
        p.validate()?;
        Ok(p)
    }

    /// Build from unnormalized weights, rescaling the threshold to keep every
    /// decision unchanged.
    pub fn from_unnormalized(
        alpha_raw: &[f64],
        kappa: f64,
        a1: f64,
        a2: f64,
        feature_spec: FeatureSpec,
    ) -> Result<Self> {
        let norm = alpha_raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        let alpha = normalize_weights(alpha_raw)?;
        Policy::new(alpha, kappa / norm, a1, a2, feature_spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.feature_spec.q() {
            return Err(Error::dim(format!(
                "{} weights for {} features",
                self.alpha.len(),
                self.feature_spec.q()
            )));
        }
        let norm = self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("weights must be unit norm, got {norm}")));
        }
        if !(self.a1 > 0.0 && self.a2 > self.a1) {
            return Err(Error::domain(format!(
                "actions must satisfy 0 < a1 < a2, got ({}, {})",
                self.a1, self.a2
            )));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.alpha.len()
    }

    pub fn risk_score(&self, tail: &HistoryTail) -> Result<f64> {
        let mut buf = vec![0.0; self.q()];
        self.feature_spec.extract_into(tail, &mut buf)?;
        Ok(crate::design::dot(&self.alpha, &buf))
    }

    /// Recommended months until the next visit.
    pub fn decide(&self, tail: &HistoryTail) -> Result<f64> {
        Ok(if self.risk_score(tail)? > self.kappa { self.a1 } else { self.a2 })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let p: Policy = serde_json::from_reader(std::io::BufReader::new(f))?;
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tail<'a>(x: &'a [f64], y: f64, a: Option<f64>, d: Option<f64>) -> HistoryTail<'a> {
        HistoryTail { covariates: x, y_prev: y, a_prev: a, delta_prev: d }
    }

    #[test]
    fn response_scaled_feature() {
        // alpha = e4 with scale 10: R = 10 * 0.3
        let spec = FeatureSpec {
            features: vec![
                Feature::Covariate { index: 0 },
                Feature::Covariate { index: 1 },
                Feature::Noncompliance,
                Feature::CurrentResponseScaled { scale: 10.0 },
            ],
            default_a0: 6.0,
            default_delta0: 6.0,
        };
        let p = Policy::new(vec![0.0, 0.0, 0.0, 1.0], 0.5, 3.0, 9.0, spec).unwrap();
        let x = [0.0, 0.0];
        let r = p.risk_score(&tail(&x, 0.3, None, None)).unwrap();
        assert_abs_diff_eq!(r, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn perfect_compliance_zeroes_noncompliance() {
        let spec = FeatureSpec::benchmark();
        let p = Policy::new(vec![0.0, 0.0, 1.0, 0.0], 0.0, 3.0, 9.0, spec).unwrap();
        let x = [1.0, 2.0];
        let r = p.risk_score(&tail(&x, 0.4, Some(7.0), Some(7.0))).unwrap();
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        // and the first decision uses A0 = delta0 = 6, also zero
        let r0 = p.risk_score(&tail(&x, 0.4, None, None)).unwrap();
        assert_abs_diff_eq!(r0, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn published_policy_reproduces_decision_boundaries() {
        // R = -0.17 X3 + 0.50 X4 + 0.22 nc + 8.2 Y_prev, threshold 1.06.
        let spec = FeatureSpec::published_q4();
        let p = Policy::from_unnormalized(&[-0.17, 0.50, 0.22, 0.82], 1.06, 3.0, 9.0, spec)
            .unwrap();
        let x_diabetic = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let x_healthy = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        // boundary response levels: (1.06 - 0.50)/8.2 and 1.06/8.2
        let b_diab = 0.56 / 8.2;
        let b_nodiab = 1.06 / 8.2;
        assert_abs_diff_eq!(b_diab, 0.068, epsilon = 5e-4);
        assert_abs_diff_eq!(b_nodiab, 0.129, epsilon = 5e-4);
        // decisions flip across the boundary (ties to the long action)
        let t_lo = tail(&x_diabetic, b_diab - 1e-6, Some(6.0), Some(6.0));
        let t_hi = tail(&x_diabetic, b_diab + 1e-6, Some(6.0), Some(6.0));
        assert_eq!(p.decide(&t_lo).unwrap(), 9.0);
        assert_eq!(p.decide(&t_hi).unwrap(), 3.0);
        let t2 = tail(&x_healthy, 0.13, Some(6.0), Some(6.0));
        assert_eq!(p.decide(&t2).unwrap(), 3.0);
    }

    #[test]
    fn tie_goes_to_long_action() {
        let spec = FeatureSpec::benchmark();
        let p = Policy::new(vec![0.0, 0.0, 0.0, 1.0], 0.5, 3.0, 9.0, spec).unwrap();
        let x = [0.0, 0.0];
        assert_eq!(p.decide(&tail(&x, 0.5, None, None)).unwrap(), 9.0);
        assert_eq!(p.decide(&tail(&x, 0.5 + 1e-12, None, None)).unwrap(), 3.0);
    }

    #[test]
    fn infinite_low_threshold_always_short() {
        let spec = FeatureSpec::benchmark();
        let p = Policy::new(vec![0.5, 0.5, 0.5, 0.5], f64::NEG_INFINITY, 3.0, 9.0, spec).unwrap();
        let x = [-10.0, -10.0];
        assert_eq!(p.decide(&tail(&x, -10.0, None, None)).unwrap(), 3.0);
    }

    #[test]
    fn normalize_preserves_direction() {
        assert_eq!(normalize_weights(&[2.0, 0.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            normalize_weights(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            vec![0.5, 0.5, 0.5, 0.5]
        );
        let v = normalize_weights(&[-2.0, -1.0, 0.0, 1.0]).unwrap();
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0] / v[1], 2.0, epsilon = 1e-12);
        assert!(normalize_weights(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn scale_invariance_of_decisions() {
        let spec = FeatureSpec::benchmark();
        let alpha = normalize_weights(&[0.3, -0.2, 0.8, 1.0]).unwrap();
        let p1 = Policy::new(alpha.clone(), 0.37, 3.0, 9.0, spec.clone()).unwrap();
        // from_unnormalized with scaled inputs must give identical decisions
        let scaled: Vec<f64> = alpha.iter().map(|a| a * 7.3).collect();
        let p2 = Policy::from_unnormalized(&scaled, 0.37 * 7.3, 3.0, 9.0, spec).unwrap();
        let mut rng = crate::seeds::rng(5);
        use rand::Rng;
        for _ in 0..200 {
            let x = [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0];
            let t = tail(
                &x,
                rng.random::<f64>() * 2.0 - 1.0,
                Some(rng.random::<f64>() * 9.0 + 0.1),
                Some(rng.random::<f64>() * 9.0 + 0.1),
            );
            assert_eq!(p1.decide(&t).unwrap(), p2.decide(&t).unwrap());
        }
    }
}
