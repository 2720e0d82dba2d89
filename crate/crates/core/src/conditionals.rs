//! Full conditional distributions of each parameter block.
//!
//! β and γ have Gaussian full conditionals, assembled in precision form and
//! factored once. `(φ, ρ, σ²)` and the interior log volatilities are only
//! known up to a constant and are evaluated as log kernels; `h_{T+1}` is
//! Gaussian.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, LatentPath, ParameterState, PriorConfig};
use crate::scalar::Scalar;

/// Gaussian full conditional `N(mean, precision⁻¹)`.
#[derive(Debug, Clone)]
pub struct GaussianMoments<T: Scalar> {
    pub mean: DVector<T>,
    precision_chol: Cholesky<T, Dyn>,
}

impl<T: Scalar> GaussianMoments<T> {
    fn from_precision(precision: DMatrix<T>, shift: DVector<T>) -> Result<Self> {
        let precision_chol = Cholesky::new(precision).ok_or_else(|| Error::NonFinite {
            term: "conditional precision is not positive definite".into(),
        })?;
        let mean = precision_chol.solve(&shift);
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite {
                term: "conditional mean".into(),
            });
        }
        Ok(Self {
            mean,
            precision_chol,
        })
    }

    /// Covariance matrix (inverse of the accumulated precision).
    pub fn cov(&self) -> DMatrix<T> {
        self.precision_chol.inverse()
    }

    pub fn precision(&self) -> DMatrix<T> {
        let l = self.precision_chol.l();
        &l * l.transpose()
    }

    /// Draws `mean + L⁻ᵀ z` where `LLᵀ` is the precision.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<T> {
        let z = DVector::from_fn(self.mean.len(), |_, _| T::sample_standard_normal(rng));
        let offset = self
            .precision_chol
            .l_dirty()
            .tr_solve_lower_triangular(&z)
            .expect("Cholesky factor has a positive diagonal");
        &self.mean + offset
    }
}

fn check_inputs<T: Scalar>(
    state: &ParameterState<T>,
    path: &LatentPath<T>,
    data: &Dataset<T>,
) -> Result<()> {
    state.validate(data.n_covariates())?;
    path.check_against(data)
}

/// Full conditional of β given everything else.
pub fn beta_conditional<T: Scalar>(
    state: &ParameterState<T>,
    path: &LatentPath<T>,
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
) -> Result<GaussianMoments<T>> {
    check_inputs(state, path, data)?;
    let n = data.n_obs();
    let y = data.returns();
    let h = path.as_slice();
    let xg = data.linear_predictor(&state.gamma);
    let one_minus_rho2 = T::one() - state.rho * state.rho;
    let rho_over_sigma = state.rho / state.sigma2.sqrt();
    let half = T::lit(0.5);

    let x = data.design().rows(0, n);
    let mut weighted = x.clone_owned();
    let mut response = DVector::<T>::zeros(n);
    for t in 0..n {
        let w = T::one() / (one_minus_rho2 * h[t].exp());
        let innovation = h[t + 1] - xg[t + 1] - state.phi * (h[t] - xg[t]);
        response[t] = w * (y[t] - rho_over_sigma * (h[t] * half).exp() * innovation);
        weighted.row_mut(t).scale_mut(w);
    }
    let precision = x.tr_mul(&weighted) + prior.beta.precision();
    let shift = x.tr_mul(&response) + prior.beta.precision_mean();
    GaussianMoments::from_precision(precision, shift)
}

/// Full conditional of γ given everything else.
pub fn gamma_conditional<T: Scalar>(
    state: &ParameterState<T>,
    path: &LatentPath<T>,
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
) -> Result<GaussianMoments<T>> {
    check_inputs(state, path, data)?;
    let n = data.n_obs();
    let k = data.n_covariates();
    let y = data.returns();
    let h = path.as_slice();
    let xb = data.linear_predictor(&state.beta);
    let (phi, rho, sigma2) = (state.phi, state.rho, state.sigma2);
    let sigma = sigma2.sqrt();
    let half = T::lit(0.5);
    let design = data.design();

    // rows x_{t+1} − φ x_t
    let z = design.rows(1, n) - design.rows(0, n) * phi;
    let response = DVector::from_fn(n, |t, _| {
        h[t + 1] - phi * h[t] - rho * sigma * (-h[t] * half).exp() * (y[t] - xb[t])
    });
    let trans_prec = T::one() / (sigma2 * (T::one() - rho * rho));
    let init_prec = (T::one() - phi * phi) / sigma2;

    let x1 = design.row(0).transpose();
    let mut precision = z.tr_mul(&z) * trans_prec + prior.gamma.precision();
    precision.ger(init_prec, &x1, &x1, T::one());
    let mut shift = z.tr_mul(&response) * trans_prec + prior.gamma.precision_mean();
    shift.axpy(init_prec * h[0], &x1, T::one());
    debug_assert_eq!(shift.len(), k);
    GaussianMoments::from_precision(precision, shift)
}

/// Per-observation quantities the `(φ, ρ, σ²)` kernel depends on, with β, γ
/// and `h` held fixed.
#[derive(Debug, Clone)]
pub struct PersistenceBlock<T: Scalar> {
    /// `h_t − x_t'γ`, t = 1..T
    lagged: Vec<T>,
    /// `h_{t+1} − x_{t+1}'γ`, t = 1..T
    lead: Vec<T>,
    /// `exp(−h_t/2)(y_t − x_t'β)`, t = 1..T
    std_resid: Vec<T>,
    /// `h_1 − x_1'γ`
    initial_dev: T,
}

impl<T: Scalar> PersistenceBlock<T> {
    pub fn new(state: &ParameterState<T>, path: &LatentPath<T>, data: &Dataset<T>) -> Result<Self> {
        path.check_against(data)?;
        let k = data.n_covariates();
        if state.beta.len() != k || state.gamma.len() != k {
            return Err(Error::InvalidParameter("coefficient length mismatch".into()));
        }
        let n = data.n_obs();
        let y = data.returns();
        let h = path.as_slice();
        let xb = data.linear_predictor(&state.beta);
        let xg = data.linear_predictor(&state.gamma);
        let half = T::lit(0.5);
        Ok(Self {
            lagged: (0..n).map(|t| h[t] - xg[t]).collect(),
            lead: (0..n).map(|t| h[t + 1] - xg[t + 1]).collect(),
            std_resid: (0..n).map(|t| (-h[t] * half).exp() * (y[t] - xb[t])).collect(),
            initial_dev: h[0] - xg[0],
        })
    }

    /// Log kernel of `π(φ, ρ, σ² | β, γ, h, y, X)`; `−∞` off the support.
    pub fn log_density(&self, phi: T, rho: T, sigma2: T, prior: &PriorConfig<T>) -> T {
        let one = T::one();
        if !(phi.abs() < one) || !(rho.abs() < one) || !(sigma2 > T::zero()) {
            return T::neg_infinity();
        }
        let half = T::lit(0.5);
        let ln2 = T::lit(2.0).ln();
        let sigma = sigma2.sqrt();
        let n = T::lit(self.lead.len() as f64);
        let one_minus_phi2 = one - phi * phi;
        let one_minus_rho2 = one - rho * rho;

        let kernel_phi = (prior.phi_a - one) * ((one + phi).ln() - ln2)
            + (prior.phi_b - one) * ((one - phi).ln() - ln2);
        let kernel_rho = (prior.rho_a - one) * ((one + rho).ln() - ln2)
            + (prior.rho_b - one) * ((one - rho).ln() - ln2);
        let kernel_sigma2 =
            -(prior.sigma_nu * half + one) * sigma2.ln() - prior.sigma_lambda / (T::lit(2.0) * sigma2);

        let rho_sigma = rho * sigma;
        let mut ssq = T::zero();
        for ((&d, &c), &u) in self.lead.iter().zip(&self.lagged).zip(&self.std_resid) {
            let e = d - phi * c - rho_sigma * u;
            ssq += e * e;
        }

        kernel_phi + kernel_rho + kernel_sigma2 + half * one_minus_phi2.ln()
            - (n + one) * half * sigma2.ln()
            - n * half * one_minus_rho2.ln()
            - one_minus_phi2 * self.initial_dev * self.initial_dev / (T::lit(2.0) * sigma2)
            - ssq / (T::lit(2.0) * one_minus_rho2 * sigma2)
    }
}

/// Log full-conditional kernel of `(φ, ρ, σ²)` evaluated at the given point,
/// with β, γ taken from `state_rest` (its φ, ρ, σ² are ignored).
pub fn log_fcd_phi_rho_sigma<T: Scalar>(
    phi: T,
    rho: T,
    sigma2: T,
    state_rest: &ParameterState<T>,
    path: &LatentPath<T>,
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
) -> Result<T> {
    let block = PersistenceBlock::new(state_rest, path, data)?;
    Ok(block.log_density(phi, rho, sigma2, prior))
}

/// Precomputed linear predictors for the single-move updates of `h`.
#[derive(Debug, Clone)]
pub struct LatentContext<'a, T: Scalar> {
    returns: &'a [T],
    xb: Vec<T>,
    xg: Vec<T>,
    phi: T,
    rho_sigma: T,
    sigma2: T,
    trans_var: T,
}

impl<'a, T: Scalar> LatentContext<'a, T> {
    pub fn new(state: &ParameterState<T>, data: &'a Dataset<T>) -> Self {
        Self {
            returns: data.returns(),
            xb: data.linear_predictor(&state.beta),
            xg: data.linear_predictor(&state.gamma),
            phi: state.phi,
            rho_sigma: state.rho * state.sigma2.sqrt(),
            sigma2: state.sigma2,
            trans_var: state.sigma2 * (T::one() - state.rho * state.rho),
        }
    }

    /// Conditional mean of `h_{t+1}` given `h_t = value` (zero-based `t < T`).
    #[inline]
    fn transition_mean(&self, t: usize, value: T) -> T {
        let resid = self.returns[t] - self.xb[t];
        self.xg[t + 1]
            + self.phi * (value - self.xg[t])
            + self.rho_sigma * (-value * T::lit(0.5)).exp() * resid
    }

    /// Log kernel of `h_t | rest` at `h_t = value`, zero-based `t < T`.
    /// The remaining entries come from `h`.
    #[inline]
    pub fn log_density_at(&self, t: usize, value: T, h: &[T]) -> T {
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let resid = self.returns[t] - self.xb[t];
        let mut out = -value * half - resid * resid * (-value).exp() * half;

        let fwd = h[t + 1] - self.transition_mean(t, value);
        out -= fwd * fwd / (two * self.trans_var);

        if t == 0 {
            let dev = value - self.xg[0];
            out -= (T::one() - self.phi * self.phi) * dev * dev / (two * self.sigma2);
        } else {
            let back = value - self.transition_mean(t - 1, h[t - 1]);
            out -= back * back / (two * self.trans_var);
        }
        out
    }

    /// Moments of the Gaussian full conditional of the final log volatility.
    pub fn last_moments(&self, h: &[T]) -> (T, T) {
        let n = self.returns.len();
        (self.transition_mean(n - 1, h[n - 1]), self.trans_var)
    }
}

/// Log full-conditional kernel of `h_t` at its current value in `path`.
///
/// `t` is zero-based and must satisfy `t < T`; the final state `h_{T+1}`
/// has the Gaussian conditional [`h_last_conditional`].
pub fn log_fcd_h<T: Scalar>(
    t: usize,
    path: &LatentPath<T>,
    state: &ParameterState<T>,
    data: &Dataset<T>,
) -> Result<T> {
    let h = path.as_slice();
    log_fcd_h_at(t, h.get(t).copied().unwrap_or(T::zero()), path, state, data)
}

/// Like [`log_fcd_h`] but evaluated at `h_t = value`.
pub fn log_fcd_h_at<T: Scalar>(
    t: usize,
    value: T,
    path: &LatentPath<T>,
    state: &ParameterState<T>,
    data: &Dataset<T>,
) -> Result<T> {
    check_inputs(state, path, data)?;
    let n = data.n_obs();
    if t >= n {
        return Err(Error::IndexOutOfRange { index: t, len: n });
    }
    Ok(LatentContext::new(state, data).log_density_at(t, value, path.as_slice()))
}

/// Mean and variance of `h_{T+1} | rest`.
pub fn h_last_conditional<T: Scalar>(
    path: &LatentPath<T>,
    state: &ParameterState<T>,
    data: &Dataset<T>,
) -> Result<(T, T)> {
    check_inputs(state, path, data)?;
    Ok(LatentContext::new(state, data).last_moments(path.as_slice()))
}
