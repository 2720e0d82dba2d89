//! Bayesian estimation of an asymmetric stochastic volatility model with
//! day-of-week and holiday covariates in both the return and the
//! log-volatility equation.
//!
//! The numerical core is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases below fix the scalar for the common cases.

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditionals;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod sampler;
pub mod scalar;
pub mod simulate;

pub use conditionals::{
    beta_conditional, gamma_conditional, h_last_conditional, log_fcd_h, log_fcd_h_at,
    log_fcd_phi_rho_sigma, GaussianMoments,
};
pub use diagnostics::{
    chain_summary, geweke_cd, inefficiency_factor, summarize, volatility_summary, ParamSummary,
};
pub use error::{Error, Result};
pub use model::{
    log_joint_posterior, prior_moments_phi, Dataset, GaussianPrior, LatentPath, ParameterState,
    PriorConfig,
};
pub use sampler::{
    adapt_step, mh_scalar_step, run_chain, run_chain_from, ChainOutput, InitialState, McmcConfig,
};
pub use scalar::Scalar;
pub use simulate::{simulate, SimSpec, Simulation};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type ParameterState64 = ParameterState<f64>;
pub type ParameterState32 = ParameterState<f32>;
pub type LatentPath64 = LatentPath<f64>;
pub type LatentPath32 = LatentPath<f32>;
pub type PriorConfig64 = PriorConfig<f64>;
pub type PriorConfig32 = PriorConfig<f32>;
pub type ChainOutput64 = ChainOutput<f64>;
pub type ChainOutput32 = ChainOutput<f32>;
pub type SimSpec64 = SimSpec<f64>;

/// Formats a float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
