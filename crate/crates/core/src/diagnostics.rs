//! Convergence diagnostic, inefficiency factor and posterior summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{ChainOutput, DrawMatrix};
use crate::scalar::Scalar;

/// Minimum chain length accepted by the diagnostics.
pub const MIN_DRAWS: usize = 100;

/// CD p-values below this flag non-convergence.
pub const CD_THRESHOLD: f64 = 0.01;

/// Longest lag the inefficiency factor will use.
pub const MAX_IF_LAG: usize = 1000;

/// Posterior summary of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Geweke p-value.
    pub cd: f64,
    /// Inefficiency factor.
    #[serde(rename = "if")]
    pub if_: f64,
    pub excludes_zero: bool,
}

impl ParamSummary {
    pub fn converged(&self) -> bool {
        self.cd >= CD_THRESHOLD
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

fn to_f64<T: Scalar>(draws: &[T]) -> Vec<f64> {
    draws.iter().map(|d| d.to_f64_lossy()).collect()
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_DRAWS {
        return Err(Error::TooShort {
            len: n,
            min: MIN_DRAWS,
        });
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Autocovariances at lags `0..=max_lag` with denominator `n`.
fn autocovariances(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    (0..=max_lag.min(n - 1))
        .map(|lag| {
            centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Parzen lag window on `|x| ≤ 1`.
pub fn parzen(x: f64) -> f64 {
    let x = x.abs();
    if x <= 0.5 {
        1.0 - 6.0 * x * x + 6.0 * x * x * x
    } else if x <= 1.0 {
        2.0 * (1.0 - x).powi(3)
    } else {
        0.0
    }
}

/// Spectral density at frequency zero, Parzen window with bandwidth
/// `4⌊n^{1/3}⌋`.
fn spectral_density_at_zero(x: &[f64]) -> f64 {
    let n = x.len();
    let bandwidth = (4 * (n as f64).cbrt().floor() as usize).max(1);
    let acov = autocovariances(x, bandwidth);
    let mut s = acov[0];
    for (lag, g) in acov.iter().enumerate().skip(1) {
        s += 2.0 * parzen(lag as f64 / bandwidth as f64) * g;
    }
    s.max(0.0)
}

/// Standard normal upper-tail probability.
fn normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Geweke convergence diagnostic: two-sided p-value comparing the means of
/// the first 20% and the last 50% of the draws.
pub fn geweke_cd<T: Scalar>(draws: &[T]) -> Result<f64> {
    check_len(draws.len())?;
    let x = to_f64(draws);
    let n = x.len();
    let n_early = n / 5;
    let n_late = n / 2;
    let early = &x[..n_early];
    let late = &x[n - n_late..];
    let var_early = spectral_density_at_zero(early) / n_early as f64;
    let var_late = spectral_density_at_zero(late) / n_late as f64;
    let diff = mean(early) - mean(late);
    let se = (var_early + var_late).sqrt();
    if se == 0.0 {
        return Ok(if diff == 0.0 { 1.0 } else { 0.0 });
    }
    let z = diff / se;
    Ok((2.0 * normal_sf(z.abs())).clamp(0.0, 1.0))
}

/// Inefficiency factor `1 + 2 Σ w(s) ρ̂_s`.
///
/// The cut-off lag `L` is the first lag with `|ρ̂_s| < 2/√n` (at most
/// [`MAX_IF_LAG`]); the sum runs over a Parzen window of width `min(2L,
/// MAX_IF_LAG)`. The result is floored at `1e-3`.
pub fn inefficiency_factor<T: Scalar>(draws: &[T]) -> Result<f64> {
    check_len(draws.len())?;
    let x = to_f64(draws);
    let n = x.len();
    let m = mean(&x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let gamma0 = centered.iter().map(|c| c * c).sum::<f64>() / n as f64;
    if gamma0 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let max_lag = MAX_IF_LAG.min(n - 1);
    let autocorr = |lag: usize| {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
            / gamma0
    };
    let threshold = 2.0 / (n as f64).sqrt();
    let mut rho = vec![1.0];
    let mut cut = max_lag;
    for lag in 1..=max_lag {
        let r = autocorr(lag);
        rho.push(r);
        if r.abs() < threshold {
            cut = lag;
            break;
        }
    }
    let bandwidth = (2 * cut).min(max_lag).max(1);
    for lag in rho.len()..=bandwidth {
        rho.push(autocorr(lag));
    }
    let sum: f64 = (1..=bandwidth)
        .map(|s| parzen(s as f64 / bandwidth as f64) * rho[s])
        .sum();
    Ok((1.0 + 2.0 * sum).max(1e-3))
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Mean and equal-tailed 95% interval.
fn mean_and_interval(x: &[f64]) -> (f64, f64, f64) {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    (
        mean(x),
        quantile_sorted(&sorted, 0.025),
        quantile_sorted(&sorted, 0.975),
    )
}

/// Posterior mean, SD, 95% interval, CD and IF of one parameter.
pub fn summarize<T: Scalar>(draws: &[T], name: &str) -> Result<ParamSummary> {
    check_len(draws.len())?;
    let x = to_f64(draws);
    let n = x.len();
    let (m, ci_low, ci_high) = mean_and_interval(&x);
    let sd = (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
    let cd = geweke_cd(draws)?;
    let if_ = match inefficiency_factor(draws) {
        Ok(v) => v,
        // a constant chain carries no autocorrelation
        Err(Error::ZeroVariance) => 1.0,
        Err(e) => return Err(e),
    };
    Ok(ParamSummary {
        name: name.to_string(),
        mean: m,
        sd,
        ci_low,
        ci_high,
        cd,
        if_,
        excludes_zero: ci_low > 0.0 || ci_high < 0.0,
    })
}

/// Summaries in reporting order: the return-equation coefficients, then
/// the volatility constant, φ, σ, ρ and the remaining volatility
/// coefficients. σ is summarized on the standard-deviation scale.
pub fn chain_summary<T: Scalar>(output: &ChainOutput<T>) -> Result<Vec<ParamSummary>> {
    let k = output.k();
    let labels = &output.covariate_labels;
    let col = |j: usize| output.draws.column(j);
    let mut rows = Vec::with_capacity(2 * k + 3);
    for (j, label) in labels.iter().enumerate() {
        rows.push(summarize(&col(j), &format!("beta_{label}"))?);
    }
    rows.push(summarize(&col(k), &format!("gamma_{}", labels[0]))?);
    rows.push(summarize(&col(2 * k), "phi")?);
    let sigma: Vec<T> = col(2 * k + 2).into_iter().map(|s2| s2.sqrt()).collect();
    rows.push(summarize(&sigma, "sigma")?);
    rows.push(summarize(&col(2 * k + 1), "rho")?);
    for (j, label) in labels.iter().enumerate().skip(1) {
        rows.push(summarize(&col(k + j), &format!("gamma_{label}"))?);
    }
    Ok(rows)
}

/// Posterior mean and 95% interval of `exp(h_t / 2)` at every time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolatilityPoint {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Transforms each stored path to the volatility scale before summarizing.
pub fn volatility_summary<T: Scalar>(h_draws: &DrawMatrix<T>) -> Vec<VolatilityPoint> {
    (0..h_draws.n_cols())
        .map(|t| {
            let vol: Vec<f64> = h_draws
                .column(t)
                .into_iter()
                .map(|h| (0.5 * h.to_f64_lossy()).exp())
                .collect();
            let (mean, ci_low, ci_high) = mean_and_interval(&vol);
            VolatilityPoint {
                mean,
                ci_low,
                ci_high,
            }
        })
        .collect()
}
