//! Fixtures shared by the criterion benchmarks.

use scwf_core::trainer::{initial_theta, Problem};
use scwf_core::TrainConfig;

/// Resolved problem and a starting parameter vector for `config`.
pub fn fixture(config: &TrainConfig) -> (Problem, Vec<f64>) {
    let problem = Problem::new(config).expect("valid benchmark config");
    let theta = initial_theta(problem.circuit.parameter_count(), config.seed);
    (problem, theta)
}
