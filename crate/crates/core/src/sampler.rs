//! Hybrid Gibbs / random-walk Metropolis-Hastings sampler.
//!
//! One iteration draws β and γ from their Gaussian conditionals, updates φ,
//! ρ and log σ² by scalar random walks, sweeps `h_1 … h_T` with single-move
//! random walks in ascending order and finally draws `h_{T+1}` exactly.
//! Step sizes follow a Robbins–Monro recursion towards a target acceptance
//! rate and are frozen once burn-in ends.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditionals::{beta_conditional, gamma_conditional, LatentContext, PersistenceBlock};
use crate::error::{Error, Result};
use crate::model::{
    log_joint_posterior, prior_moments_phi, Dataset, LatentPath, ParameterState, PriorConfig,
};
use crate::scalar::Scalar;

/// Proposals with `|h_t|` above this are rejected outright.
pub const H_GUARD: f64 = 50.0;

/// Run length, thinning and adaptation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub n_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub target_acceptance: f64,
    pub adapt_during_burn_in_only: bool,
    /// Holds ρ at this value and skips its update (standard SV when 0).
    pub fixed_rho: Option<f64>,
    /// Keep every stored latent path (needed for volatility summaries).
    pub store_latent: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iterations: 200_000,
            burn_in: 50_000,
            thin: 10,
            seed: 0,
            target_acceptance: 0.44,
            adapt_during_burn_in_only: true,
            fixed_rho: None,
            store_latent: true,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::InvalidConfig("n_iterations must be positive".into()));
        }
        if self.burn_in >= self.n_iterations {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be below n_iterations ({})",
                self.burn_in, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be positive".into()));
        }
        if self.n_stored() == 0 {
            return Err(Error::InvalidConfig("schedule stores no draws".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidConfig(
                "target_acceptance must lie in (0, 1)".into(),
            ));
        }
        if let Some(rho) = self.fixed_rho {
            if !(rho.abs() < 1.0) {
                return Err(Error::InvalidConfig("fixed_rho must lie in (-1, 1)".into()));
            }
        }
        Ok(())
    }

    /// Additionally requires enough stored draws for the diagnostics.
    pub fn validate_for_summary(&self) -> Result<()> {
        self.validate()?;
        if self.n_stored() < crate::diagnostics::MIN_DRAWS {
            return Err(Error::InvalidConfig(format!(
                "schedule stores {} draws; at least {} are needed for summaries",
                self.n_stored(),
                crate::diagnostics::MIN_DRAWS
            )));
        }
        Ok(())
    }

    /// `(n_iterations − burn_in) / thin`.
    pub fn n_stored(&self) -> usize {
        self.n_iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }
}

/// Row-major matrix of stored draws.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawMatrix<T> {
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Copy> DrawMatrix<T> {
    pub fn with_capacity(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_cols,
            data: Vec::with_capacity(n_rows * n_cols),
        }
    }

    pub fn push_row(&mut self, row: &[T]) {
        assert_eq!(row.len(), self.n_cols, "row length mismatch");
        self.data.extend_from_slice(row);
    }

    pub fn n_rows(&self) -> usize {
        self.data.len().checked_div(self.n_cols).unwrap_or(0)
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.n_cols.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        assert!(j < self.n_cols, "column {j} out of range");
        self.data.iter().skip(j).step_by(self.n_cols).copied().collect()
    }
}

/// Random-walk scales for every MH-updated quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizes {
    pub phi: f64,
    pub rho: f64,
    /// Scale of the walk on `log σ²`.
    pub log_sigma2: f64,
    /// One per `h_1 … h_T`.
    pub h: Vec<f64>,
}

impl StepSizes {
    fn initial(n_obs: usize) -> Self {
        Self {
            phi: 0.05,
            rho: 0.1,
            log_sigma2: 0.2,
            h: vec![0.5; n_obs],
        }
    }
}

/// Post-burn-in acceptance rates.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceRates {
    pub phi: f64,
    pub rho: f64,
    pub sigma2: f64,
    /// One per `h_1 … h_T`.
    pub h: Vec<f64>,
}

impl AcceptanceRates {
    pub fn h_mean(&self) -> f64 {
        if self.h.is_empty() {
            return 0.0;
        }
        self.h.iter().sum::<f64>() / self.h.len() as f64
    }
}

/// Thinned post-burn-in output of one chain.
#[derive(Debug, Clone)]
pub struct ChainOutput<T: Scalar> {
    /// Columns `β₁…β_k, γ₁…γ_k, φ, ρ, σ²`.
    pub draws: DrawMatrix<T>,
    /// Columns `h_1 … h_{T+1}`; zero columns when latent storage is off.
    pub h_draws: DrawMatrix<T>,
    pub param_names: Vec<String>,
    pub covariate_labels: Vec<String>,
    pub acceptance: AcceptanceRates,
    /// Step sizes in force when burn-in ended.
    pub steps_after_burn_in: StepSizes,
    /// Step sizes at the last iteration.
    pub final_steps: StepSizes,
    pub seed_used: u64,
}

impl<T: Scalar> ChainOutput<T> {
    pub fn n_stored(&self) -> usize {
        self.draws.n_rows()
    }

    pub fn k(&self) -> usize {
        self.covariate_labels.len()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<T>> {
        self.param_names
            .iter()
            .position(|n| n == name)
            .map(|j| self.draws.column(j))
    }
}

/// Column names `beta_<label>…, gamma_<label>…, phi, rho, sigma2`.
pub fn parameter_names(labels: &[String]) -> Vec<String> {
    labels
        .iter()
        .map(|l| format!("beta_{l}"))
        .chain(labels.iter().map(|l| format!("gamma_{l}")))
        .chain(["phi", "rho", "sigma2"].map(String::from))
        .collect()
}

/// One random-walk Metropolis-Hastings step.
///
/// Proposes `current + step·z` and accepts with probability
/// `min(1, exp(Δ log density))`. Proposals with `−∞` log density are
/// always rejected.
pub fn mh_scalar_step<T, F, R>(current: T, mut log_density: F, step: T, rng: &mut R) -> (T, bool)
where
    T: Scalar,
    F: FnMut(T) -> T,
    R: Rng + ?Sized,
{
    let proposal = current + step * T::sample_standard_normal(rng);
    let log_new = log_density(proposal);
    if !log_new.is_finite() {
        return (current, false);
    }
    let log_ratio = log_new - log_density(current);
    if log_ratio >= T::zero() || T::sample_unit(rng).ln() < log_ratio {
        (proposal, true)
    } else {
        (current, false)
    }
}

/// Robbins–Monro update `log step += (accept − target) / iteration^0.6`.
pub fn adapt_step(step: f64, accepted: bool, iteration: usize, target: f64) -> f64 {
    let accept = if accepted { 1.0 } else { 0.0 };
    let gain = (iteration.max(1) as f64).powf(-0.6);
    step * ((accept - target) * gain).exp()
}

/// Starting point of a chain.
#[derive(Debug, Clone)]
pub struct InitialState<T: Scalar> {
    pub params: ParameterState<T>,
    pub path: LatentPath<T>,
}

impl<T: Scalar> InitialState<T> {
    /// `h_t = log s²` of the demeaned returns, φ at its prior mean, ρ = 0,
    /// `σ² = 5λ₀/ν₀`, β = γ = 0.
    pub fn default_for(data: &Dataset<T>, prior: &PriorConfig<T>) -> Self {
        let y = data.returns();
        let n = T::lit(y.len() as f64);
        let mean = y.iter().fold(T::zero(), |a, &v| a + v) / n;
        let var = y.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean)) / (n - T::one());
        let level = if var > T::zero() { var.ln() } else { T::zero() };
        let k = data.n_covariates();
        let (phi, _) = prior_moments_phi(prior);
        Self {
            params: ParameterState {
                beta: nalgebra::DVector::zeros(k),
                gamma: nalgebra::DVector::zeros(k),
                phi,
                rho: T::zero(),
                sigma2: T::lit(5.0) * prior.sigma_lambda / prior.sigma_nu,
            },
            path: LatentPath::constant(y.len() + 1, level),
        }
    }
}

/// Runs one chain from the default starting point.
pub fn run_chain<T: Scalar>(
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
    config: &McmcConfig,
) -> Result<ChainOutput<T>> {
    let init = InitialState::default_for(data, prior);
    run_chain_from(data, prior, config, init)
}

/// Runs one chain from `init`.
pub fn run_chain_from<T: Scalar>(
    data: &Dataset<T>,
    prior: &PriorConfig<T>,
    config: &McmcConfig,
    init: InitialState<T>,
) -> Result<ChainOutput<T>> {
    config.validate()?;
    let k = data.n_covariates();
    prior.validate(k)?;
    let n_obs = data.n_obs();

    let InitialState {
        params: mut state,
        mut path,
    } = init;
    if let Some(rho) = config.fixed_rho {
        state.rho = T::lit(rho);
    }
    match log_joint_posterior(&state, &path, data, prior) {
        Ok(_) => {}
        Err(Error::NonFinite { term }) => return Err(Error::Initialization { term }),
        Err(e) => return Err(e),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let target = config.target_acceptance;
    let guard = T::lit(H_GUARD);
    let mut steps = StepSizes::initial(n_obs);
    let mut steps_after_burn_in = steps.clone();

    let n_stored = config.n_stored();
    let mut draws = DrawMatrix::with_capacity(n_stored, 2 * k + 3);
    let latent_cols = if config.store_latent { n_obs + 1 } else { 0 };
    let mut h_draws = DrawMatrix::with_capacity(n_stored, latent_cols);

    let mut accepted_phi = 0usize;
    let mut accepted_rho = 0usize;
    let mut accepted_sigma2 = 0usize;
    let mut accepted_h = vec![0usize; n_obs];

    for iteration in 0..config.n_iterations {
        let in_burn_in = iteration < config.burn_in;
        let adapt = in_burn_in || !config.adapt_during_burn_in_only;
        let round = iteration + 1;

        state.beta = beta_conditional(&state, &path, data, prior)?.draw(&mut rng);
        state.gamma = gamma_conditional(&state, &path, data, prior)?.draw(&mut rng);

        let block = PersistenceBlock::new(&state, &path, data)?;
        let (rho, sigma2) = (state.rho, state.sigma2);
        let (phi, acc) = mh_scalar_step(
            state.phi,
            |p| block.log_density(p, rho, sigma2, prior),
            T::lit(steps.phi),
            &mut rng,
        );
        state.phi = phi;
        if adapt {
            steps.phi = adapt_step(steps.phi, acc, round, target);
        }
        accepted_phi += usize::from(acc && !in_burn_in);

        if config.fixed_rho.is_none() {
            let phi = state.phi;
            let (rho, acc) = mh_scalar_step(
                state.rho,
                |r| block.log_density(phi, r, sigma2, prior),
                T::lit(steps.rho),
                &mut rng,
            );
            state.rho = rho;
            if adapt {
                steps.rho = adapt_step(steps.rho, acc, round, target);
            }
            accepted_rho += usize::from(acc && !in_burn_in);
        }

        let (phi, rho) = (state.phi, state.rho);
        // walk on log σ²; the `+ log σ²` term is the Jacobian
        let (log_sigma2, acc) = mh_scalar_step(
            state.sigma2.ln(),
            |l| block.log_density(phi, rho, l.exp(), prior) + l,
            T::lit(steps.log_sigma2),
            &mut rng,
        );
        state.sigma2 = log_sigma2.exp();
        if adapt {
            steps.log_sigma2 = adapt_step(steps.log_sigma2, acc, round, target);
        }
        accepted_sigma2 += usize::from(acc && !in_burn_in);

        let ctx = LatentContext::new(&state, data);
        let h = path.as_mut_slice();
        for t in 0..n_obs {
            let (value, acc) = {
                let h_view: &[T] = h;
                mh_scalar_step(
                    h_view[t],
                    |v| {
                        if v.abs() > guard {
                            T::neg_infinity()
                        } else {
                            ctx.log_density_at(t, v, h_view)
                        }
                    },
                    T::lit(steps.h[t]),
                    &mut rng,
                )
            };
            h[t] = value;
            if adapt {
                steps.h[t] = adapt_step(steps.h[t], acc, round, target);
            }
            accepted_h[t] += usize::from(acc && !in_burn_in);
        }
        let (mean, var) = ctx.last_moments(h);
        h[n_obs] = mean + var.sqrt() * T::sample_standard_normal(&mut rng);

        check_invariants(&state, path.as_slice(), iteration)?;

        if iteration + 1 == config.burn_in {
            steps_after_burn_in = steps.clone();
        }
        if !in_burn_in && (iteration + 1 - config.burn_in).is_multiple_of(config.thin) {
            draws.push_row(&state.to_row());
            if config.store_latent {
                h_draws.push_row(path.as_slice());
            }
        }
    }
    if config.burn_in == 0 {
        steps_after_burn_in = StepSizes::initial(n_obs);
    }

    let kept = (config.n_iterations - config.burn_in) as f64;
    let rate = |count: usize| count as f64 / kept;
    let acceptance = AcceptanceRates {
        phi: rate(accepted_phi),
        rho: if config.fixed_rho.is_some() {
            0.0
        } else {
            rate(accepted_rho)
        },
        sigma2: rate(accepted_sigma2),
        h: accepted_h.into_iter().map(rate).collect(),
    };

    Ok(ChainOutput {
        draws,
        h_draws,
        param_names: parameter_names(data.labels()),
        covariate_labels: data.labels().to_vec(),
        acceptance,
        steps_after_burn_in,
        final_steps: steps,
        seed_used: config.seed,
    })
}

fn check_invariants<T: Scalar>(state: &ParameterState<T>, h: &[T], iteration: usize) -> Result<()> {
    let violation = |what: String| Error::InvariantViolation { iteration, what };
    if let Err(e) = state.validate(state.beta.len()) {
        return Err(violation(e.to_string()));
    }
    if let Some(t) = h.iter().position(|v| !v.is_finite()) {
        return Err(violation(format!("h[{t}] is not finite")));
    }
    Ok(())
}
