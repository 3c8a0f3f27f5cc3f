//! The variational training loop: forward pass, loss, reverse-mode gradient
//! and an AdamW step, repeated under the learning-rate and regularization
//! schedules.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{self, CircuitSpec};
use crate::diffprog;
use crate::error::{Result, ScwfError};
use crate::expr;
use crate::field::{self, VelocityField, WaveField};
use crate::grid::Grid;
use crate::optimizer::{AdamWHyper, AdamWState, LrDecay, Schedule};

/// Half-width of the uniform interval the angles are drawn from.
pub const INIT_SCALE: f64 = 0.1;

/// Training configuration, mirroring `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n_points: usize,
    pub qubits: usize,
    pub groups: usize,
    pub hbar: f64,
    /// One expression per velocity component.
    pub target: Vec<String>,
    pub iters: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub eps_start: f64,
    pub eps_decay: f64,
    pub eps_every: usize,
    pub seed: u64,
    pub weight_decay: f64,
    pub noise_lambda: f64,
    pub trace_every: usize,
    #[serde(default, skip_serializing_if = "is_linear")]
    pub lr_decay: LrDecay,
}

fn is_linear(d: &LrDecay) -> bool {
    *d == LrDecay::Linear
}

impl TrainConfig {
    /// Defaults for a `dim`-dimensional run on an `n_points`-per-axis grid;
    /// the qubit count follows from the grid size.
    pub fn new(dim: usize, n_points: usize, groups: usize, target: &[&str]) -> Self {
        let positions = n_points.pow(dim as u32);
        TrainConfig {
            dim,
            n_points,
            qubits: positions.trailing_zeros() as usize + 1,
            groups,
            hbar: 1.0,
            target: target.iter().map(|s| s.to_string()).collect(),
            iters: 10_000,
            lr_start: 0.03,
            lr_end: 0.015,
            eps_start: 1.0,
            eps_decay: 0.7,
            eps_every: 1000,
            seed: 42,
            weight_decay: 0.0,
            noise_lambda: 0.0,
            trace_every: 100,
            lr_decay: LrDecay::Linear,
        }
    }

    /// Benchmark case 1: `u = sin x`, 6 qubits, 2 groups.
    pub fn case1() -> Self {
        TrainConfig::new(1, 32, 2, &["sin(x)"])
    }

    /// Benchmark case 2: `u = sin x + cos 2x + sin 3x`.
    pub fn case2() -> Self {
        TrainConfig::new(1, 32, 2, &["sin(x)+cos(2*x)+sin(3*x)"])
    }

    /// Benchmark case 3: `u = [cos x sin y, sin x cos y]`, 11 qubits, 5 groups.
    pub fn case3() -> Self {
        TrainConfig::new(2, 32, 5, &["cos(x)*sin(y)", "sin(x)*cos(y)"])
    }

    /// Set the grid size and recompute the qubit count to match.
    pub fn with_points(mut self, n_points: usize) -> Self {
        self.n_points = n_points;
        self.qubits = n_points.pow(self.dim as u32).trailing_zeros() as usize + 1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let grid = Grid::new(self.dim, self.n_points)?;
        if self.qubits < 2 || grid.len() != 1usize << (self.qubits - 1) {
            return Err(ScwfError::domain(format!(
                "{} qubits cannot encode a {}-d grid with N={} (need 2^(n-1) = N^d)",
                self.qubits, self.dim, self.n_points
            )));
        }
        if self.groups < 1 {
            return Err(ScwfError::domain("groups must be at least 1"));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(ScwfError::domain(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.target.len() != self.dim {
            return Err(ScwfError::domain(format!(
                "{} target expressions given for a {}-d velocity",
                self.target.len(),
                self.dim
            )));
        }
        if self.iters < 1 {
            return Err(ScwfError::domain("iters must be at least 1"));
        }
        if self.trace_every < 1 || self.eps_every < 1 {
            return Err(ScwfError::domain("trace_every and eps_every must be at least 1"));
        }
        if !(self.lr_start > 0.0 && self.lr_end > 0.0) {
            return Err(ScwfError::domain("learning rates must be positive"));
        }
        if !(self.noise_lambda >= 0.0 && self.eps_start >= 0.0 && self.eps_decay >= 0.0 && self.weight_decay >= 0.0) {
            return Err(ScwfError::domain("noise_lambda, eps_start, eps_decay and weight_decay must be nonnegative"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n_points)
    }

    pub fn circuit(&self) -> Result<CircuitSpec> {
        CircuitSpec::build(self.qubits, self.groups)
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            lr_start: self.lr_start,
            lr_end: self.lr_end,
            total_iters: self.iters,
            eps_start: self.eps_start,
            eps_decay_factor: self.eps_decay,
            eps_every: self.eps_every,
            lr_decay: self.lr_decay,
        }
    }

    /// The noise-free target velocity.
    pub fn clean_target(&self) -> Result<VelocityField> {
        let grid = self.grid()?;
        let components = self
            .target
            .iter()
            .map(|text| Ok(expr::eval_on_grid(&expr::parse(text)?, &grid)?))
            .collect::<Result<Vec<_>>>()?;
        VelocityField::new(grid, components)
    }
}

/// Everything a run needs, resolved from a validated [`TrainConfig`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub circuit: CircuitSpec,
    /// Reference for the reported relative error.
    pub clean_target: VelocityField,
    /// What the loss fits; equals `clean_target` unless noise is requested.
    pub fit_target: VelocityField,
}

impl Problem {
    pub fn new(config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let circuit = config.circuit()?;
        let clean_target = config.clean_target()?;
        let fit_target = if config.noise_lambda > 0.0 {
            field::add_noise(&clean_target, config.noise_lambda, config.seed)
        } else {
            clean_target.clone()
        };
        Ok(Problem { grid, circuit, clean_target, fit_target })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub loss: f64,
    pub rel_error: f64,
    pub lr: f64,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub trace: Vec<TraceRow>,
    pub circuit: CircuitSpec,
    pub final_theta: Vec<f64>,
    pub final_wave: WaveField,
    pub final_velocity: VelocityField,
    /// Relative error of the final velocity against the clean target.
    pub final_error: f64,
    /// Loss at the final parameters with the regularizer switched off.
    pub final_fidelity_loss: f64,
    pub wall_time: f64,
}

/// Result of a single forward evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Loss with `ε = 0` against the fitted target.
    pub loss: f64,
    pub relative_error: f64,
    pub wave: WaveField,
    pub velocity: VelocityField,
}

/// Initial angles, uniform in `[−0.1, 0.1]`.
pub fn initial_theta(parameter_count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stream 0 is used for target noise
    rng.set_stream(1);
    (0..parameter_count).map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE)).collect()
}

pub fn evaluate(theta: &[f64], config: &TrainConfig) -> Result<Evaluation> {
    evaluate_problem(theta, &Problem::new(config)?, config.hbar)
}

pub fn evaluate_problem(theta: &[f64], problem: &Problem, hbar: f64) -> Result<Evaluation> {
    let wave = ansatz::decode(&ansatz::forward(&problem.circuit, theta)?, &problem.grid)?;
    let velocity = field::velocity_from_wave(&wave, hbar);
    let loss = field::regularized_misfit(&wave, &problem.fit_target, hbar, 0.0)? / (hbar * hbar);
    let relative_error = field::relative_error(&velocity, &problem.clean_target)?;
    Ok(Evaluation { loss, relative_error, wave, velocity })
}

pub fn train(config: &TrainConfig) -> Result<TrainReport> {
    let started = Instant::now();
    let problem = Problem::new(config)?;
    let schedule = config.schedule();
    let spec = &problem.circuit;
    let hbar = config.hbar;

    let mut theta = initial_theta(spec.parameter_count(), config.seed);
    let hyper = AdamWHyper { weight_decay: config.weight_decay, ..AdamWHyper::default() };
    let mut opt = AdamWState::new(theta.len(), hyper);
    let mut trace = Vec::with_capacity(config.iters / config.trace_every + 2);

    let row = |iter: usize, loss: f64, theta: &[f64], lr: f64, eps: f64| -> Result<TraceRow> {
        let wave = ansatz::decode(&ansatz::forward(spec, theta)?, &problem.grid)?;
        let velocity = field::velocity_from_wave(&wave, hbar);
        let rel_error = field::relative_error(&velocity, &problem.clean_target)?;
        Ok(TraceRow { iter, loss, rel_error, lr, eps })
    };

    for t in 0..config.iters {
        let lr = schedule.lr_at(t)?;
        let eps = schedule.eps_at(t);
        let (loss, grad) = diffprog::loss_and_grad(spec, &theta, &problem.fit_target, hbar, eps)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(ScwfError::Divergence { iter: t, loss });
        }
        if t % config.trace_every == 0 {
            trace.push(row(t, loss, &theta, lr, eps)?);
        }
        opt.step(&mut theta, &grad, lr)?;
    }

    let t = config.iters;
    let eps = schedule.eps_at(t);
    let final_loss = diffprog::loss(spec, &theta, &problem.fit_target, hbar, eps)?;
    if !final_loss.is_finite() {
        return Err(ScwfError::Divergence { iter: t, loss: final_loss });
    }
    trace.push(row(t, final_loss, &theta, schedule.lr_at(t)?, eps)?);

    let eval = evaluate_problem(&theta, &problem, hbar)?;
    Ok(TrainReport {
        trace,
        circuit: spec.clone(),
        final_theta: theta,
        final_wave: eval.wave,
        final_velocity: eval.velocity,
        final_error: eval.relative_error,
        final_fidelity_loss: eval.loss,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_shape() {
        let text = r#"{"dim":1,"N":32,"qubits":6,"groups":2,"hbar":1.0,"target":["sin(x)"],"iters":10000,
            "lr_start":0.03,"lr_end":0.015,"eps_start":1.0,"eps_decay":0.7,"eps_every":1000,"seed":42,
            "weight_decay":0.0,"noise_lambda":0.0,"trace_every":100}"#;
        let config: TrainConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config, TrainConfig::case1());
        config.validate().unwrap();
        let echoed: serde_json::Value = serde_json::to_value(&config).unwrap();
        assert_eq!(echoed, serde_json::from_str::<serde_json::Value>(text).unwrap());
    }

    #[test]
    fn config_requires_every_key() {
        let text = r#"{"dim":1,"N":32,"qubits":6,"groups":2,"hbar":1.0,"target":["sin(x)"]}"#;
        assert!(serde_json::from_str::<TrainConfig>(text).is_err());
    }

    #[test]
    fn validation() {
        TrainConfig::case3().validate().unwrap();
        assert_eq!(TrainConfig::case3().qubits, 11);
        let bad = [
            TrainConfig { qubits: 7, ..TrainConfig::case1() },
            TrainConfig { hbar: 0.0, ..TrainConfig::case1() },
            TrainConfig { iters: 0, ..TrainConfig::case1() },
            TrainConfig { target: vec![], ..TrainConfig::case1() },
            TrainConfig { n_points: 24, ..TrainConfig::case1() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(ScwfError::Domain(_))), "{c:?}");
        }
        assert_eq!(TrainConfig::case1().with_points(128).qubits, 8);
    }

    #[test]
    fn distinct_errors() {
        let parse = TrainConfig { target: vec!["sin(x".into()], ..TrainConfig::case1() };
        assert!(matches!(train(&parse), Err(ScwfError::Parse(_))));
        let eval = TrainConfig { target: vec!["1/x".into()], ..TrainConfig::case1() };
        assert!(matches!(train(&eval), Err(ScwfError::Eval(_))));
        let shape = TrainConfig { qubits: 5, ..TrainConfig::case1() };
        assert!(matches!(train(&shape), Err(ScwfError::Domain(_))));
        let diverge = TrainConfig { iters: 5, lr_start: f64::MAX, lr_end: f64::MAX, ..TrainConfig::case1() };
        assert!(matches!(train(&diverge), Err(ScwfError::Divergence { .. })));
    }

    #[test]
    fn zero_theta_has_unit_error() {
        let config = TrainConfig::case2();
        let spec = config.circuit().unwrap();
        let e = evaluate(&vec![0.0; spec.parameter_count()], &config).unwrap();
        assert_eq!(e.relative_error, 1.0);
        assert!(e.velocity.components()[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn initial_angles_are_small_and_seeded() {
        let a = initial_theta(60, 1);
        assert_eq!(a, initial_theta(60, 1));
        assert_ne!(a, initial_theta(60, 2));
        assert!(a.iter().all(|v| v.abs() <= INIT_SCALE));
    }

    #[test]
    fn short_run_traces_and_is_reproducible() {
        let config = TrainConfig { iters: 250, trace_every: 100, ..TrainConfig::case1() };
        let a = train(&config).unwrap();
        let iters: Vec<usize> = a.trace.iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![0, 100, 200, 250]);
        assert!(a.trace.last().unwrap().loss < a.trace[0].loss);
        let b = train(&config).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.final_theta, b.final_theta);

        let e = evaluate(&a.final_theta, &config).unwrap();
        assert_eq!(e.relative_error, a.final_error);
        assert_eq!(a.trace.last().unwrap().rel_error, a.final_error);
    }

    #[test]
    fn window_minima_mostly_decrease() {
        let config = TrainConfig { trace_every: 1, ..TrainConfig::case1() };
        let report = train(&config).unwrap();
        let minima: Vec<f64> = report
            .trace
            .chunks(1000)
            .take(10)
            .map(|w| w.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min))
            .collect();
        let holds = minima.windows(2).filter(|w| w[1] <= w[0]).count();
        assert!(holds >= 8, "{minima:?}");
    }

    #[test]
    fn analytic_bypass_meets_tolerance() {
        let config = TrainConfig::case1();
        let problem = Problem::new(&config).unwrap();
        let wave = field::analytic_sin_wave(&problem.grid).unwrap();
        let u = field::velocity_from_wave(&wave, 1.0);
        let err = field::relative_error(&u, &problem.clean_target).unwrap();
        assert!((err - 0.020789475273548047).abs() < 1e-12, "{err}");
    }
}
