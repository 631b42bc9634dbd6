//! Dense SPD helpers on top of nalgebra: jittered Cholesky, multivariate
//! normal draws, Wishart / inverse-Wishart draws (Bartlett decomposition).

use crate::error::{Error, Result};
use crate::stats::sample_std_normal;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Cholesky with escalating diagonal jitter.
///
/// Tries `jitter0 * scale^k` for k = 0..tries (jitter 0 attempted first);
/// errors out if the matrix never factors.
pub fn cholesky_jitter(
    m: &DMatrix<f64>,
    jitter0: f64,
    scale: f64,
    tries: usize,
) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let mut jitter = jitter0;
    for _ in 0..tries {
        let mut mj = m.clone();
        for i in 0..m.nrows() {
            mj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(mj) {
            return Ok(c);
        }
        jitter *= scale;
    }
    Err(Error::NotPositiveDefinite(format!(
        "dim {}, jitter up to {:.1e}",
        m.nrows(),
        jitter / scale
    )))
}

/// Gibbs-sampler repair policy: 1e-8 jitter, three escalations, then abort.
pub fn cholesky_gibbs(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    cholesky_jitter(m, 1e-8, 10.0, 3)
}

/// Surrogate-covariance policy: 1e-10 escalating x10 up to 1e-6.
pub fn cholesky_surrogate(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    cholesky_jitter(m, 1e-10, 10.0, 5)
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Draw x ~ N(mean, L L^T) given the Cholesky factor of the covariance.
pub fn sample_mvn<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    chol: &Cholesky<f64, Dyn>,
    rng: &mut R,
) -> DVector<f64> {
    let n = mean.len();
    let z = DVector::from_fn(n, |_, _| sample_std_normal(rng));
    mean + chol.l() * z
}

/// Draw x ~ N(mean, P^{-1}) for precision matrix P given its Cholesky factor.
///
/// Solves L^T x = z so that x has covariance P^{-1}.
pub fn sample_mvn_precision<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    prec_chol: &Cholesky<f64, Dyn>,
    rng: &mut R,
) -> DVector<f64> {
    let n = mean.len();
    let z = DVector::from_fn(n, |_, _| sample_std_normal(rng));
    let lt = prec_chol.l().transpose();
    let x = lt
        .solve_upper_triangular(&z)
        .expect("upper-triangular solve");
    mean + x
}

/// Multivariate normal log-density given the covariance Cholesky factor.
pub fn mvn_logpdf(x: &DVector<f64>, mean: &DVector<f64>, chol: &Cholesky<f64, Dyn>) -> f64 {
    let n = x.len() as f64;
    let diff = x - mean;
    let sol = chol
        .l()
        .solve_lower_triangular(&diff)
        .expect("lower-triangular solve");
    let quad = sol.dot(&sol);
    let logdet: f64 = (0..x.len()).map(|i| chol.l()[(i, i)].ln()).sum();
    -0.5 * quad - logdet - n * crate::stats::LN_SQRT_2PI
}

/// Wishart(df, S) draw via Bartlett: W = L A A^T L^T with chol(S) = L L^T.
pub fn sample_wishart<R: Rng + ?Sized>(
    df: f64,
    scale_chol: &Cholesky<f64, Dyn>,
    rng: &mut R,
) -> DMatrix<f64> {
    let p = scale_chol.l().nrows();
    assert!(df > p as f64 - 1.0, "wishart df {df} too small for dim {p}");
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        let chi_sq = Gamma::new((df - i as f64) / 2.0, 2.0)
            .expect("gamma params")
            .sample(rng);
        a[(i, i)] = chi_sq.sqrt();
        for j in 0..i {
            a[(i, j)] = sample_std_normal(rng);
        }
    }
    let la = scale_chol.l() * a;
    &la * la.transpose()
}

/// InvWishart(df, Psi) draw: inverse of Wishart(df, Psi^{-1}).
pub fn sample_inv_wishart<R: Rng + ?Sized>(
    df: f64,
    psi: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let psi_chol = cholesky_gibbs(psi)?;
    let psi_inv = psi_chol.inverse();
    let psi_inv_chol = cholesky_gibbs(&psi_inv)?;
    let w = sample_wishart(df, &psi_inv_chol, rng);
    let w_chol = cholesky_gibbs(&w)?;
    let mut inv = w_chol.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}
