mod common;

use common::simulated_constant;
use nalgebra::DVector;
use sv_calendar::sampler::{InitialState, H_GUARD};
use sv_calendar::{
    inefficiency_factor, run_chain, run_chain_from, summarize, Error, LatentPath, McmcConfig,
    ParameterState, PriorConfig,
};

fn short(n_iterations: usize, burn_in: usize, thin: usize, seed: u64) -> McmcConfig {
    McmcConfig {
        n_iterations,
        burn_in,
        thin,
        seed,
        ..McmcConfig::default()
    }
}

fn constant_truth(rho: f64) -> ParameterState<f64> {
    ParameterState {
        beta: DVector::from_element(1, 0.05),
        gamma: DVector::from_element(1, 0.5),
        phi: 0.95,
        rho,
        sigma2: 0.09,
    }
}

#[test]
fn constant_model_recovers_truth() {
    let truth = constant_truth(-0.4);
    let truth_row = truth.to_row();
    let mut good_reps = 0;
    for rep in 0..20 {
        let (data, _) = simulated_constant(2000, truth.clone(), 100 + rep);
        let out = run_chain(&data, &PriorConfig::default_for(1), &short(20_000, 5000, 5, rep)).unwrap();
        let covered = (0..5)
            .filter(|&j| summarize(&out.draws.column(j), &out.param_names[j]).unwrap().covers(truth_row[j]))
            .count();
        good_reps += usize::from(covered >= 4);
    }
    assert!(good_reps >= 18, "only {good_reps}/20 replications covered four of five parameters");
}

#[test]
fn no_leverage_in_data_gives_rho_near_zero() {
    let (data, _) = simulated_constant(2000, constant_truth(0.0), 7);
    let out = run_chain(&data, &PriorConfig::default_for(1), &short(10_000, 3000, 2, 3)).unwrap();
    let rho = summarize(&out.column_by_name("rho").unwrap(), "rho").unwrap();
    assert!(rho.mean.abs() < 0.1, "posterior mean of rho {}", rho.mean);
}

#[test]
fn fixed_rho_is_never_updated() {
    let (data, _) = simulated_constant(200, constant_truth(0.0), 8);
    let config = McmcConfig {
        fixed_rho: Some(0.0),
        ..short(600, 100, 5, 1)
    };
    let out = run_chain(&data, &PriorConfig::default_for(1), &config).unwrap();
    assert!(out.column_by_name("rho").unwrap().iter().all(|&r| r == 0.0));
    assert_eq!(out.acceptance.rho, 0.0);
}

#[test]
fn single_stored_draw() {
    let (data, _) = simulated_constant(50, constant_truth(-0.3), 9);
    let out = run_chain(&data, &PriorConfig::default_for(1), &short(17, 7, 10, 0)).unwrap();
    assert_eq!(out.n_stored(), 1);
    assert_eq!(out.h_draws.n_rows(), 1);
    assert_eq!(out.h_draws.n_cols(), 51);
}

#[test]
fn adaptation_freezes_after_burn_in() {
    let (data, _) = simulated_constant(100, constant_truth(-0.3), 10);
    let out = run_chain(&data, &PriorConfig::default_for(1), &short(1500, 500, 1, 2)).unwrap();
    assert_eq!(out.steps_after_burn_in, out.final_steps);
    assert_ne!(out.final_steps.phi, 0.05);

    let config = McmcConfig {
        adapt_during_burn_in_only: false,
        ..short(1500, 500, 1, 2)
    };
    let out = run_chain(&data, &PriorConfig::default_for(1), &config).unwrap();
    assert_ne!(out.steps_after_burn_in, out.final_steps);
}

#[test]
fn acceptance_rates_near_target() {
    let (data, _) = simulated_constant(500, constant_truth(-0.4), 11);
    let out = run_chain(&data, &PriorConfig::default_for(1), &short(6000, 2000, 1, 4)).unwrap();
    for rate in [out.acceptance.phi, out.acceptance.rho, out.acceptance.sigma2, out.acceptance.h_mean()] {
        assert!((0.3..0.6).contains(&rate), "acceptance rate {rate}");
    }
}

#[test]
fn dispersed_starts_agree() {
    let (data, _) = simulated_constant(500, constant_truth(-0.4), 12);
    let prior = PriorConfig::default_for(1);
    let config = short(20_000, 5000, 1, 5);
    let dispersed = |beta: f64, gamma: f64, phi: f64, rho: f64, sigma2: f64| {
        let mut init = InitialState::default_for(&data, &prior);
        init.params = ParameterState {
            beta: DVector::from_element(1, beta),
            gamma: DVector::from_element(1, gamma),
            phi,
            rho,
            sigma2,
        };
        init
    };
    let low = dispersed(-1.0, -1.0, 0.3, 0.6, 0.5);
    let high = dispersed(1.0, 2.0, 0.995, -0.9, 0.002);
    let a = run_chain_from(&data, &prior, &config, low).unwrap();
    let b = run_chain_from(&data, &prior, &McmcConfig { seed: 6, ..config }, high).unwrap();
    let se = |draws: &[f64]| {
        let s = summarize(draws, "x").unwrap();
        s.sd * (inefficiency_factor(draws).unwrap() / draws.len() as f64).sqrt()
    };
    let (pa, pb) = (a.column_by_name("phi").unwrap(), b.column_by_name("phi").unwrap());
    let (ma, mb) = (summarize(&pa, "phi").unwrap().mean, summarize(&pb, "phi").unwrap().mean);
    let combined = (se(&pa).powi(2) + se(&pb).powi(2)).sqrt();
    assert!((ma - mb).abs() < 3.0 * combined, "{ma} vs {mb}, se {combined}");
}

#[test]
fn stored_draws_respect_constraints() {
    let (data, _) = simulated_constant(300, constant_truth(-0.6), 13);
    let out = run_chain(&data, &PriorConfig::default_for(1), &short(3000, 500, 1, 7)).unwrap();
    for row in out.draws.rows() {
        assert!(row.iter().all(|v| v.is_finite()));
        let (phi, rho, sigma2) = (row[2], row[3], row[4]);
        assert!(phi.abs() < 1.0 && rho.abs() < 1.0 && sigma2 > 0.0);
    }
    for row in out.h_draws.rows() {
        assert!(row.iter().all(|h| h.is_finite() && h.abs() <= H_GUARD));
    }
}

#[test]
fn single_precision_chain() {
    let (data, _) = simulated_constant(400, constant_truth(-0.4), 14);
    let data32 = data.cast::<f32>();
    let out = run_chain(&data32, &PriorConfig::<f32>::default_for(1), &short(4000, 1000, 2, 8)).unwrap();
    assert_eq!(out.n_stored(), 1500);
    let phi = summarize(&out.column_by_name("phi").unwrap(), "phi").unwrap();
    assert!(phi.mean > 0.6 && phi.mean < 1.0, "{}", phi.mean);
    assert!(out.draws.rows().flatten().all(|v| v.is_finite()));
}

#[test]
fn concurrent_chains_match_sequential_runs() {
    let (data, _) = simulated_constant(200, constant_truth(-0.4), 15);
    let prior = PriorConfig::default_for(1);
    let configs: Vec<McmcConfig> = (0..3).map(|s| short(800, 200, 2, s)).collect();
    let parallel: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(|| run_chain(&data, &prior, c).unwrap().draws.rows().flatten().copied().collect()))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (c, par) in configs.iter().zip(&parallel) {
        let seq: Vec<f64> = run_chain(&data, &prior, c).unwrap().draws.rows().flatten().copied().collect();
        assert_eq!(&seq, par);
    }
}

#[test]
fn initialization_failure_names_the_term() {
    let (data, _) = simulated_constant(20, constant_truth(0.0), 16);
    let prior = PriorConfig::default_for(1);
    let mut init = InitialState::default_for(&data, &prior);
    let mut h = init.path.clone().into_vec();
    h[3] = 800.0;
    init.path = LatentPath::new(h).unwrap();
    match run_chain_from(&data, &prior, &short(10, 5, 1, 0), init) {
        Err(Error::Initialization { term }) => assert_eq!(term, "observations"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let (data, _) = simulated_constant(20, constant_truth(0.0), 17);
    let prior = PriorConfig::default_for(1);
    for bad in [
        short(10, 10, 1, 0),
        short(10, 5, 0, 0),
        McmcConfig {
            fixed_rho: Some(1.0),
            ..short(10, 5, 1, 0)
        },
        McmcConfig {
            target_acceptance: 1.5,
            ..short(10, 5, 1, 0)
        },
    ] {
        assert!(matches!(run_chain(&data, &prior, &bad), Err(Error::InvalidConfig(_))));
    }
}
