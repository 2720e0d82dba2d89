#![allow(dead_code)]

pub mod oracle;
pub mod toy;

use nalgebra::{DMatrix, DVector};
use sv_calendar::{simulate, Dataset, ParameterState, SimSpec, Simulation};

/// Constant plus two day-of-week style dummies: a weekend indicator and a
/// mid-week indicator.
pub fn dummy_design(rows: usize) -> (DMatrix<f64>, Vec<String>) {
    let design = DMatrix::from_fn(rows, 3, |t, j| match j {
        0 => 1.0,
        1 => f64::from(u8::from(t % 7 >= 5)),
        _ => f64::from(u8::from(t % 7 == 2)),
    });
    (design, vec!["constant".into(), "weekend".into(), "midweek".into()])
}

pub fn recovery_truth() -> ParameterState<f64> {
    ParameterState {
        beta: DVector::from_vec(vec![0.1, 0.2, -0.15]),
        gamma: DVector::from_vec(vec![1.0, -0.3, 0.25]),
        phi: 0.95,
        rho: -0.4,
        sigma2: 0.09,
    }
}

pub fn simulated(n: usize, truth: ParameterState<f64>, seed: u64) -> (Dataset<f64>, Simulation<f64>) {
    let (design, labels) = dummy_design(n + 1);
    let spec = SimSpec {
        truth,
        design,
        labels,
        seed,
    };
    let sim = simulate(&spec).unwrap();
    (sim.dataset(&spec).unwrap(), sim)
}

/// Constant-only dataset.
pub fn simulated_constant(n: usize, truth: ParameterState<f64>, seed: u64) -> (Dataset<f64>, Simulation<f64>) {
    let spec = SimSpec {
        truth,
        design: DMatrix::from_element(n + 1, 1, 1.0),
        labels: vec!["constant".into()],
        seed,
    };
    let sim = simulate(&spec).unwrap();
    (sim.dataset(&spec).unwrap(), sim)
}
