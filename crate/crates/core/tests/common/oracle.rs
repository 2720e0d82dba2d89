//! Independent reference implementations used to check the model code.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{Beta, Continuous, InverseGamma, Normal};
use sv_calendar::{
    beta_conditional, gamma_conditional, h_last_conditional, log_fcd_h_at, log_fcd_phi_rho_sigma,
    Dataset, LatentPath, ParameterState, PriorConfig,
};

pub struct Instance {
    pub data: Dataset<f64>,
    pub state: ParameterState<f64>,
    pub path: LatentPath<f64>,
    pub prior: PriorConfig<f64>,
}

/// Small random instance with `3 ≤ T ≤ 8` and `1 ≤ k ≤ 3`.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let n = rng.random_range(3..=8);
    let k = rng.random_range(1..=3);
    let design = DMatrix::from_fn(n + 1, k, |_, j| {
        if j == 0 {
            1.0
        } else if rng.random_bool(0.5) {
            f64::from(u8::from(rng.random_bool(0.3)))
        } else {
            rng.random_range(-1.0..1.0)
        }
    });
    let labels = (0..k).map(|j| format!("x{j}")).collect();
    let returns = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let data = Dataset::new(returns, design, labels).unwrap();
    let state = ParameterState {
        beta: DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)),
        gamma: DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0)),
        phi: rng.random_range(-0.95..0.95),
        rho: rng.random_range(-0.9..0.9),
        sigma2: rng.random_range(0.05..2.0),
    };
    let path = LatentPath::new((0..=n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    Instance {
        data,
        state,
        path,
        prior: PriorConfig::default_for(k),
    }
}

/// Log of the bivariate normal density of `(a, b)`.
fn log_bivariate_normal(a: f64, b: f64, ma: f64, mb: f64, va: f64, vb: f64, cov: f64) -> f64 {
    let det = va * vb - cov * cov;
    let (da, db) = (a - ma, b - mb);
    let q = (vb * da * da - 2.0 * cov * da * db + va * db * db) / det;
    -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * q
}

/// Joint log posterior written as a product of bivariate normals for
/// `(y_t, h_{t+1}) | h_t`, the stationary law of `h_1`, and the priors taken
/// from `statrs`. Only valid for the diagonal default priors.
pub fn oracle_log_joint(
    state: &ParameterState<f64>,
    path: &LatentPath<f64>,
    data: &Dataset<f64>,
    prior: &PriorConfig<f64>,
) -> f64 {
    let x = data.design();
    let y = data.returns();
    let h = path.as_slice();
    let (phi, rho, s2) = (state.phi, state.rho, state.sigma2);
    let s = s2.sqrt();
    let xb = x * &state.beta;
    let xg = x * &state.gamma;

    let mut total = Normal::new(xg[0], (s2 / (1.0 - phi * phi)).sqrt()).unwrap().ln_pdf(h[0]);
    for t in 0..y.len() {
        let vy = h[t].exp();
        total += log_bivariate_normal(
            y[t],
            h[t + 1],
            xb[t],
            xg[t + 1] + phi * (h[t] - xg[t]),
            vy,
            s2,
            rho * s * vy.sqrt(),
        );
    }

    let prior_normal = |coef: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>| -> f64 {
        (0..coef.len())
            .map(|j| Normal::new(mean[j], cov[(j, j)].sqrt()).unwrap().ln_pdf(coef[j]))
            .sum()
    };
    total += prior_normal(&state.beta, prior.beta.mean(), &prior.beta.cov());
    total += prior_normal(&state.gamma, prior.gamma.mean(), &prior.gamma.cov());
    total += Beta::new(prior.phi_a, prior.phi_b).unwrap().ln_pdf((phi + 1.0) / 2.0) - 2f64.ln();
    total += Beta::new(prior.rho_a, prior.rho_b).unwrap().ln_pdf((rho + 1.0) / 2.0) - 2f64.ln();
    total += InverseGamma::new(prior.sigma_nu / 2.0, prior.sigma_lambda / 2.0)
        .unwrap()
        .ln_pdf(s2);
    total
}

/// Mean and precision of a Gaussian kernel `f` (log scale, exactly quadratic)
/// recovered with unit-step central differences around `x0`.
pub fn fd_gaussian_moments(f: impl Fn(&DVector<f64>) -> f64, x0: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let k = x0.len();
    let e = |i: usize| DVector::from_fn(k, |j, _| f64::from(u8::from(i == j)));
    let f0 = f(x0);
    let grad = DVector::from_fn(k, |i, _| (f(&(x0 + e(i))) - f(&(x0 - e(i)))) / 2.0);
    let mut hess = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            hess[(i, j)] = if i == j {
                f(&(x0 + e(i))) - 2.0 * f0 + f(&(x0 - e(i)))
            } else {
                (f(&(x0 + e(i) + e(j))) - f(&(x0 + e(i) - e(j))) - f(&(x0 - e(i) + e(j)))
                    + f(&(x0 - e(i) - e(j))))
                    / 4.0
            };
        }
    }
    let precision = -hess;
    let mean = x0 + precision.clone().lu().solve(&grad).unwrap();
    (mean, precision)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn mat_rel_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel_err(*x, *y)).fold(0.0, f64::max)
}

/// Largest relative discrepancy between every full conditional and its oracle
/// on one instance.
pub fn conditional_discrepancy<R: Rng>(inst: &Instance, rng: &mut R) -> f64 {
    let Instance {
        data,
        state,
        path,
        prior,
    } = inst;
    let joint = |s: &ParameterState<f64>, p: &LatentPath<f64>| oracle_log_joint(s, p, data, prior);
    let mut worst: f64 = 0.0;

    // β
    let fb = |b: &DVector<f64>| {
        let mut s = state.clone();
        s.beta = b.clone();
        joint(&s, path)
    };
    let (mean, prec) = fd_gaussian_moments(fb, &state.beta);
    let got = beta_conditional(state, path, data, prior).unwrap();
    worst = worst.max(mat_rel_err(got.mean.as_slice(), mean.as_slice()));
    worst = worst.max(mat_rel_err(got.precision().as_slice(), prec.as_slice()));

    // γ
    let fg = |g: &DVector<f64>| {
        let mut s = state.clone();
        s.gamma = g.clone();
        joint(&s, path)
    };
    let (mean, prec) = fd_gaussian_moments(fg, &state.gamma);
    let got = gamma_conditional(state, path, data, prior).unwrap();
    worst = worst.max(mat_rel_err(got.mean.as_slice(), mean.as_slice()));
    worst = worst.max(mat_rel_err(got.precision().as_slice(), prec.as_slice()));

    // (φ, ρ, σ²): kernel differences against joint differences
    let base = joint(state, path);
    let fcd_base = log_fcd_phi_rho_sigma(state.phi, state.rho, state.sigma2, state, path, data, prior).unwrap();
    for _ in 0..3 {
        let mut s = state.clone();
        s.phi = rng.random_range(-0.99..0.99);
        s.rho = rng.random_range(-0.99..0.99);
        s.sigma2 = rng.random_range(0.01..3.0);
        let fcd = log_fcd_phi_rho_sigma(s.phi, s.rho, s.sigma2, state, path, data, prior).unwrap();
        worst = worst.max(rel_err(fcd - fcd_base, joint(&s, path) - base));
    }

    // interior h_t
    let h = path.as_slice();
    for t in 0..data.n_obs() {
        let value = h[t] + rng.random_range(-1.5..1.5);
        let mut moved = h.to_vec();
        moved[t] = value;
        let moved = LatentPath::new(moved).unwrap();
        let d_fcd = log_fcd_h_at(t, value, path, state, data).unwrap()
            - log_fcd_h_at(t, h[t], path, state, data).unwrap();
        worst = worst.max(rel_err(d_fcd, joint(state, &moved) - base));
    }

    // h_{T+1}
    let last = h.len() - 1;
    let fl = |v: &DVector<f64>| {
        let mut moved = h.to_vec();
        moved[last] = v[0];
        joint(state, &LatentPath::new(moved).unwrap())
    };
    let (mean, prec) = fd_gaussian_moments(fl, &DVector::from_element(1, h[last]));
    let (m, v) = h_last_conditional(path, state, data).unwrap();
    worst = worst.max(rel_err(m, mean[0]));
    worst = worst.max(rel_err(1.0 / v, prec[(0, 0)]));
    worst
}
