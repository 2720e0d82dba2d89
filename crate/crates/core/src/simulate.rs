//! Synthetic data from the asymmetric SV data-generating process.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, LatentPath, ParameterState};
use crate::scalar::Scalar;

/// Truth, covariates and seed of one synthetic dataset.
#[derive(Debug, Clone)]
pub struct SimSpec<T: Scalar> {
    pub truth: ParameterState<T>,
    /// `(T+1) × k`, column 0 the constant.
    pub design: DMatrix<T>,
    pub labels: Vec<String>,
    pub seed: u64,
}

/// Simulated returns together with the shocks that produced them.
#[derive(Debug, Clone)]
pub struct Simulation<T: Scalar> {
    pub returns: Vec<T>,
    pub path: LatentPath<T>,
    pub eps: Vec<T>,
    pub eta: Vec<T>,
}

impl<T: Scalar> Simulation<T> {
    pub fn dataset(&self, spec: &SimSpec<T>) -> Result<Dataset<T>> {
        Dataset::new(self.returns.clone(), spec.design.clone(), spec.labels.clone())
    }
}

/// Draws `h_1` from its stationary law, then for each `t` draws `ε_t`,
/// `η_t | ε_t ~ N(ρσε_t, σ²(1−ρ²))`, emits `y_t` and `h_{t+1}`.
pub fn simulate<T: Scalar>(spec: &SimSpec<T>) -> Result<Simulation<T>> {
    let k = spec.design.ncols();
    let rows = spec.design.nrows();
    if rows < 4 {
        return Err(Error::InvalidDataset(format!("design has {rows} rows, need at least 4")));
    }
    if spec.labels.len() != k {
        return Err(Error::InvalidDataset("labels do not match design columns".into()));
    }
    spec.truth.validate(k)?;

    let n = rows - 1;
    let ParameterState {
        ref beta,
        ref gamma,
        phi,
        rho,
        sigma2,
    } = spec.truth;
    let sigma = sigma2.sqrt();
    let cond_sd = sigma * (T::one() - rho * rho).sqrt();
    let xb = &spec.design * beta;
    let xg = &spec.design * gamma;
    let half = T::lit(0.5);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut h = Vec::with_capacity(rows);
    let mut returns = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);

    let stationary_sd = sigma / (T::one() - phi * phi).sqrt();
    h.push(xg[0] + stationary_sd * T::sample_standard_normal(&mut rng));
    for t in 0..n {
        let e = T::sample_standard_normal(&mut rng);
        let v = rho * sigma * e + cond_sd * T::sample_standard_normal(&mut rng);
        returns.push(xb[t] + (h[t] * half).exp() * e);
        h.push(xg[t + 1] + phi * (h[t] - xg[t]) + v);
        eps.push(e);
        eta.push(v);
    }
    Ok(Simulation {
        returns,
        path: LatentPath::new(h)?,
        eps,
        eta,
    })
}
