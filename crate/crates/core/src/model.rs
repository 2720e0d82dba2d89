//! Domain types of the asymmetric stochastic volatility model and its joint
//! log posterior.
//!
//! The model, for `t = 1..T`:
//!
//! ```text
//! y_t     = x_t'β + exp(h_t / 2) ε_t
//! h_{t+1} = x_{t+1}'γ + φ (h_t − x_t'γ) + η_t
//! h_1     ~ N(x_1'γ, σ² / (1 − φ²))
//! (ε_t, η_t) ~ N(0, [[1, ρσ], [ρσ, σ²]])
//! ```
//!
//! Setting `ρ = 0` gives the standard SV model with covariates.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::scalar::{half_ln_two_pi, ln_gamma, Scalar};

/// Returns plus the `(T+1) × k` covariate matrix.
///
/// Row `t` of the design pairs with return `t`; the extra final row is the
/// covariate vector of `h_{T+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    returns: Vec<T>,
    design: DMatrix<T>,
    labels: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(returns: Vec<T>, design: DMatrix<T>, labels: Vec<String>) -> Result<Self> {
        let n = returns.len();
        if n < 3 {
            return Err(Error::InvalidDataset(format!(
                "need at least 3 returns, got {n}"
            )));
        }
        if design.nrows() != n + 1 {
            return Err(Error::InvalidDataset(format!(
                "design has {} rows, expected T+1 = {}",
                design.nrows(),
                n + 1
            )));
        }
        if design.ncols() == 0 {
            return Err(Error::InvalidDataset("design has no columns".into()));
        }
        if labels.len() != design.ncols() {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} design columns",
                labels.len(),
                design.ncols()
            )));
        }
        if let Some(i) = returns.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidDataset(format!("return {i} is not finite")));
        }
        if design.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset("design has non-finite entries".into()));
        }
        if design.column(0).iter().any(|&x| x != T::one()) {
            return Err(Error::InvalidDataset(
                "design column 0 must be the constant 1".into(),
            ));
        }
        Ok(Self {
            returns,
            design,
            labels,
        })
    }

    /// Dataset whose only covariate is the constant.
    pub fn constant_only(returns: Vec<T>) -> Result<Self> {
        let rows = returns.len() + 1;
        Self::new(
            returns,
            DMatrix::from_element(rows, 1, T::one()),
            vec!["constant".to_string()],
        )
    }

    pub fn returns(&self) -> &[T] {
        &self.returns
    }

    pub fn design(&self) -> &DMatrix<T> {
        &self.design
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of returns `T`.
    pub fn n_obs(&self) -> usize {
        self.returns.len()
    }

    /// Number of covariates `k`.
    pub fn n_covariates(&self) -> usize {
        self.design.ncols()
    }

    /// `X v` over all `T+1` rows.
    pub(crate) fn linear_predictor(&self, coef: &DVector<T>) -> Vec<T> {
        (&self.design * coef).iter().copied().collect()
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Dataset<U> {
        Dataset {
            returns: self.returns.iter().map(|y| U::lit(y.to_f64_lossy())).collect(),
            design: self.design.map(|x| U::lit(x.to_f64_lossy())),
            labels: self.labels.clone(),
        }
    }
}

/// The sampled parameter block `(β, γ, φ, ρ, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterState<T: Scalar> {
    pub beta: DVector<T>,
    pub gamma: DVector<T>,
    pub phi: T,
    pub rho: T,
    pub sigma2: T,
}

impl<T: Scalar> ParameterState<T> {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.beta.len() != k || self.gamma.len() != k {
            return Err(Error::InvalidParameter(format!(
                "beta/gamma lengths {}/{} do not match k = {k}",
                self.beta.len(),
                self.gamma.len()
            )));
        }
        if self.beta.iter().chain(self.gamma.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        if !(self.phi.abs() < T::one()) {
            return Err(Error::InvalidParameter(format!("|phi| = {} >= 1", self.phi)));
        }
        if !(self.rho.abs() < T::one()) {
            return Err(Error::InvalidParameter(format!("|rho| = {} >= 1", self.rho)));
        }
        if !(self.sigma2 > T::zero()) || !self.sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma2 = {} is not positive",
                self.sigma2
            )));
        }
        Ok(())
    }

    /// Flattened as `β₁…β_k, γ₁…γ_k, φ, ρ, σ²`.
    pub fn to_row(&self) -> Vec<T> {
        let mut row = Vec::with_capacity(2 * self.beta.len() + 3);
        row.extend(self.beta.iter().copied());
        row.extend(self.gamma.iter().copied());
        row.extend([self.phi, self.rho, self.sigma2]);
        row
    }
}

/// Log volatilities `h_1 … h_{T+1}` (stored zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPath<T: Scalar> {
    h: Vec<T>,
}

impl<T: Scalar> LatentPath<T> {
    pub fn new(h: Vec<T>) -> Result<Self> {
        if let Some(i) = h.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("h[{i}] is not finite")));
        }
        Ok(Self { h })
    }

    pub fn constant(len: usize, value: T) -> Self {
        Self { h: vec![value; len] }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.h
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.h
    }

    pub(crate) fn check_against(&self, data: &Dataset<T>) -> Result<()> {
        if self.h.len() != data.n_obs() + 1 {
            return Err(Error::InvalidParameter(format!(
                "latent path has length {}, expected T+1 = {}",
                self.h.len(),
                data.n_obs() + 1
            )));
        }
        Ok(())
    }
}

/// Multivariate normal prior held through the Cholesky factor of its
/// covariance.
#[derive(Debug, Clone)]
pub struct GaussianPrior<T: Scalar> {
    mean: DVector<T>,
    cov_chol: Cholesky<T, Dyn>,
    precision: DMatrix<T>,
    precision_mean: DVector<T>,
    log_det_cov: T,
}

impl<T: Scalar> GaussianPrior<T> {
    pub fn new(mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        let k = mean.len();
        if cov.nrows() != k || cov.ncols() != k {
            return Err(Error::InvalidPrior(format!(
                "covariance is {}x{}, mean has length {k}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let tol = T::lit(1e-10);
        for i in 0..k {
            for j in 0..i {
                let (a, b) = (cov[(i, j)], cov[(j, i)]);
                if (a - b).abs() > tol * (a.abs() + b.abs() + T::one()) {
                    return Err(Error::InvalidPrior("covariance is not symmetric".into()));
                }
            }
        }
        let cov_chol = Cholesky::new(cov)
            .ok_or_else(|| Error::InvalidPrior("covariance is not positive definite".into()))?;
        let precision = cov_chol.inverse();
        let precision_mean = &precision * &mean;
        let log_det_cov = cov_chol
            .l_dirty()
            .diagonal()
            .iter()
            .fold(T::zero(), |acc, &d| acc + d.ln())
            * T::lit(2.0);
        Ok(Self {
            mean,
            cov_chol,
            precision,
            precision_mean,
            log_det_cov,
        })
    }

    /// `N(0, variance · I)`.
    pub fn isotropic(k: usize, variance: T) -> Result<Self> {
        Self::new(
            DVector::zeros(k),
            DMatrix::from_diagonal_element(k, k, variance),
        )
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn cov(&self) -> DMatrix<T> {
        let l = self.cov_chol.l();
        &l * l.transpose()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub(crate) fn precision(&self) -> &DMatrix<T> {
        &self.precision
    }

    /// `Σ₀⁻¹ μ₀`.
    pub(crate) fn precision_mean(&self) -> &DVector<T> {
        &self.precision_mean
    }

    pub fn log_density(&self, x: &DVector<T>) -> T {
        let diff = x - &self.mean;
        let z = self
            .cov_chol
            .l_dirty()
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        let k = T::lit(self.dim() as f64);
        -k * half_ln_two_pi::<T>() - T::lit(0.5) * self.log_det_cov - T::lit(0.5) * z.norm_squared()
    }
}

/// All prior hyperparameters.
///
/// `(φ+1)/2 ~ Beta(phi_a, phi_b)`, `(ρ+1)/2 ~ Beta(rho_a, rho_b)`,
/// `σ² ~ IG(sigma_nu/2, sigma_lambda/2)`.
#[derive(Debug, Clone)]
pub struct PriorConfig<T: Scalar> {
    pub beta: GaussianPrior<T>,
    pub gamma: GaussianPrior<T>,
    pub phi_a: T,
    pub phi_b: T,
    pub rho_a: T,
    pub rho_b: T,
    pub sigma_nu: T,
    pub sigma_lambda: T,
}

impl<T: Scalar> PriorConfig<T> {
    /// Zero means, `100·I` covariances, `Beta(20, 1.5)` for φ, uniform ρ,
    /// `IG(5/2, 0.01/2)` for σ².
    pub fn default_for(k: usize) -> Self {
        Self {
            beta: GaussianPrior::isotropic(k, T::lit(100.0)).expect("100·I is SPD"),
            gamma: GaussianPrior::isotropic(k, T::lit(100.0)).expect("100·I is SPD"),
            phi_a: T::lit(20.0),
            phi_b: T::lit(1.5),
            rho_a: T::one(),
            rho_b: T::one(),
            sigma_nu: T::lit(5.0),
            sigma_lambda: T::lit(0.01),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.beta.dim() != k || self.gamma.dim() != k {
            return Err(Error::InvalidPrior(format!(
                "prior dimensions {}/{} do not match k = {k}",
                self.beta.dim(),
                self.gamma.dim()
            )));
        }
        let shapes = [
            ("phi_a", self.phi_a),
            ("phi_b", self.phi_b),
            ("rho_a", self.rho_a),
            ("rho_b", self.rho_b),
            ("sigma_nu", self.sigma_nu),
            ("sigma_lambda", self.sigma_lambda),
        ];
        for (name, v) in shapes {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidPrior(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Log density of the Beta prior on `(φ+1)/2`, including the `½` Jacobian.
    pub fn log_prior_phi(&self, phi: T) -> T {
        log_scaled_beta(phi, self.phi_a, self.phi_b)
    }

    pub fn log_prior_rho(&self, rho: T) -> T {
        log_scaled_beta(rho, self.rho_a, self.rho_b)
    }

    /// Inverse-gamma log density with shape `ν₀/2` and scale `λ₀/2`.
    pub fn log_prior_sigma2(&self, sigma2: T) -> T {
        if !(sigma2 > T::zero()) {
            return T::neg_infinity();
        }
        let half = T::lit(0.5);
        let shape = self.sigma_nu * half;
        let scale = self.sigma_lambda * half;
        shape * scale.ln() - ln_gamma(shape) - (shape + T::one()) * sigma2.ln() - scale / sigma2
    }
}

/// Log density of `x ∈ (−1, 1)` when `(x+1)/2 ~ Beta(a, b)`.
fn log_scaled_beta<T: Scalar>(x: T, a: T, b: T) -> T {
    if !(x.abs() < T::one()) {
        return T::neg_infinity();
    }
    let half = T::lit(0.5);
    let u = (T::one() + x) * half;
    let v = (T::one() - x) * half;
    let ln_beta_fn = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    (a - T::one()) * u.ln() + (b - T::one()) * v.ln() - ln_beta_fn - T::lit(2.0).ln()
}

/// Mean and standard deviation of `2X − 1` for `X ~ Beta(a, b)`.
pub fn scaled_beta_moments<T: Scalar>(a: T, b: T) -> (T, T) {
    let two = T::lit(2.0);
    let s = a + b;
    let mean = two * a / s - T::one();
    let sd = two * (a * b / (s * s * (s + T::one()))).sqrt();
    (mean, sd)
}

/// Prior mean and standard deviation of φ.
pub fn prior_moments_phi<T: Scalar>(prior: &PriorConfig<T>) -> (T, T) {
    scaled_beta_moments(prior.phi_a, prior.phi_b)
}

/// The joint log posterior broken into its additive pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTerms<T> {
    pub prior_beta: T,
    pub prior_gamma: T,
    pub prior_phi: T,
    pub prior_rho: T,
    pub prior_sigma2: T,
    pub initial_state: T,
    pub observations: T,
    pub transitions: T,
}

impl<T: Scalar> JointTerms<T> {
    pub fn total(&self) -> T {
        self.named().iter().fold(T::zero(), |acc, (_, v)| acc + *v)
    }

    pub fn named(&self) -> [(&'static str, T); 8] {
        [
            ("prior_beta", self.prior_beta),
            ("prior_gamma", self.prior_gamma),
            ("prior_phi", self.prior_phi),
            ("prior_rho", self.prior_rho),
            ("prior_sigma2", self.prior_sigma2),
            ("initial_state", self.initial_state),
            ("observations", self.observations),
            ("transitions", self.transitions),
        ]
    }
}

/// `log N(x | mean, var)`.
#[inline]
pub(crate) fn log_normal<T: Scalar>(x: T, mean: T, var: T) -> T {
    let d = x - mean;
    -half_ln_two_pi::<T>() - T::lit(0.5) * var.ln() - d * d / (T::lit(2.0) * var)
}

/// Evaluates every term of the joint log posterior without checking
/// finiteness.
pub fn log_joint_terms<T: Scalar>(
    state: &ParameterState<T>,
    path: &LatentPath<T>,
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
) -> Result<JointTerms<T>> {
    let k = data.n_covariates();
    state.validate(k)?;
    prior.validate(k)?;
    path.check_against(data)?;

    let y = data.returns();
    let h = path.as_slice();
    let xb = data.linear_predictor(&state.beta);
    let xg = data.linear_predictor(&state.gamma);
    let (phi, rho, sigma2) = (state.phi, state.rho, state.sigma2);
    let sigma = sigma2.sqrt();
    let trans_var = sigma2 * (T::one() - rho * rho);

    let initial_state = log_normal(h[0], xg[0], sigma2 / (T::one() - phi * phi));

    let mut observations = T::zero();
    let mut transitions = T::zero();
    for t in 0..y.len() {
        let resid = y[t] - xb[t];
        observations += log_normal(y[t], xb[t], h[t].exp());
        let mean = xg[t + 1] + phi * (h[t] - xg[t]) + rho * sigma * (-h[t] * T::lit(0.5)).exp() * resid;
        transitions += log_normal(h[t + 1], mean, trans_var);
    }

    Ok(JointTerms {
        prior_beta: prior.beta.log_density(&state.beta),
        prior_gamma: prior.gamma.log_density(&state.gamma),
        prior_phi: prior.log_prior_phi(phi),
        prior_rho: prior.log_prior_rho(rho),
        prior_sigma2: prior.log_prior_sigma2(sigma2),
        initial_state,
        observations,
        transitions,
    })
}

/// Log of the unnormalized joint posterior of `(β, γ, φ, ρ, σ², h)`.
///
/// Fails with [`Error::NonFinite`] naming the first diverging term.
pub fn log_joint_posterior<T: Scalar>(
    state: &ParameterState<T>,
    path: &LatentPath<T>,
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
) -> Result<T> {
    let terms = log_joint_terms(state, path, data, prior)?;
    for (name, value) in terms.named() {
        if !value.is_finite() {
            return Err(Error::NonFinite { term: name.into() });
        }
    }
    let total = terms.total();
    if !total.is_finite() {
        return Err(Error::NonFinite { term: "total".into() });
    }
    Ok(total)
}
