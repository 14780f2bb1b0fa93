//! Adam optimization, the two-stage LWPP warm start, and accuracy metrics.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, InitStateSpec};
use crate::error::{Error, Result};
use crate::exact::ExactEvaluator;
use crate::lwpp::{LwppEvaluator, TruncationConfig};
use crate::pauli::PauliSum;
use crate::rng::{seeded_rng, uniform_angles};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub iterations: usize,
    /// Stop early once the gradient 2-norm falls below this.
    pub stop_grad_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, iterations: 1500, stop_grad_norm: None }
    }
}

impl AdamConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        Self { iterations, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("adam learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("adam epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Pre,
    Main,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Pre => "pre",
            Stage::Main => "main",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    GradientTolerance,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub exact_energy: Option<f64>,
    pub relative_error: Option<f64>,
    pub grad_norm: f64,
    pub wall_ms: f64,
}

/// One optimization stage. Record `t` holds the cost at the parameters before
/// the `t`-th update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub stage: Stage,
    pub records: Vec<IterationRecord>,
    pub final_params: Vec<f64>,
    pub stop: StopReason,
    /// Exact energy at `final_params`, when evaluated.
    pub final_exact_energy: Option<f64>,
    pub final_relative_error: Option<f64>,
}

impl Trajectory {
    pub fn last_relative_error(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.relative_error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Uniform in `[-π, π]`.
    Random,
    /// Uniform in `0.01 × [-π, π]`.
    NearIdentity,
    Explicit(Vec<f64>),
}

impl InitMode {
    pub fn draw(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            InitMode::Random => Ok(uniform_angles(&mut seeded_rng(seed), count, 1.0)),
            InitMode::NearIdentity => Ok(uniform_angles(&mut seeded_rng(seed), count, 0.01)),
            InitMode::Explicit(v) if v.len() == count => Ok(v.clone()),
            InitMode::Explicit(v) => Err(Error::ParamCount { expected: count, found: v.len() }),
        }
    }
}

/// Adam with bias correction for a fixed budget.
pub fn minimize_adam<F>(cost_and_grad: F, init: &[f64], cfg: &AdamConfig) -> Result<(Vec<f64>, Trajectory)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    minimize_adam_with(cost_and_grad, init, cfg, Stage::Main, |_, _| Ok(()))
}

/// As [`minimize_adam`], calling `inspect(&mut record, params)` on every
/// record before it is stored so callers can attach exact energies.
pub fn minimize_adam_with<F, M>(
    mut cost_and_grad: F,
    init: &[f64],
    cfg: &AdamConfig,
    stage: Stage,
    mut inspect: M,
) -> Result<(Vec<f64>, Trajectory)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    M: FnMut(&mut IterationRecord, &[f64]) -> Result<()>,
{
    cfg.validate()?;
    let mut params = init.to_vec();
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    let mut traj = Trajectory {
        stage,
        records: Vec::with_capacity(cfg.iterations),
        final_params: Vec::new(),
        stop: StopReason::Budget,
        final_exact_energy: None,
        final_relative_error: None,
    };
    let (mut b1t, mut b2t) = (1.0, 1.0);
    for t in 1..=cfg.iterations {
        let started = Instant::now();
        let (cost, grad) = cost_and_grad(&params)?;
        if grad.len() != params.len() {
            return Err(Error::ParamCount { expected: params.len(), found: grad.len() });
        }
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut record =
            IterationRecord { iteration: t, cost, exact_energy: None, relative_error: None, grad_norm, wall_ms: 0.0 };
        if !cost.is_finite() || !grad_norm.is_finite() {
            traj.records.push(record);
            traj.stop = StopReason::NonFinite;
            traj.final_params = params;
            return Err(Error::NonFinite { iteration: t, trajectory: Box::new(traj) });
        }
        inspect(&mut record, &params)?;
        let converged = cfg.stop_grad_norm.is_some_and(|tol| grad_norm < tol);
        if !converged {
            b1t *= cfg.beta1;
            b2t *= cfg.beta2;
            for (((p, mi), vi), g) in params.iter_mut().zip(&mut m).zip(&mut v).zip(&grad) {
                *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * g;
                *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * g * g;
                let m_hat = *mi / (1.0 - b1t);
                let v_hat = *vi / (1.0 - b2t);
                *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
        record.wall_ms = started.elapsed().as_secs_f64() * 1e3;
        traj.records.push(record);
        if converged {
            traj.stop = StopReason::GradientTolerance;
            break;
        }
    }
    traj.final_params = params.clone();
    Ok((params, traj))
}

/// `|e - e_gs| / |e_gs|`.
pub fn relative_error(e: f64, e_gs: f64) -> Result<f64> {
    if e_gs == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    Ok((e - e_gs).abs() / e_gs.abs())
}

/// Nearest-rank boundary of the best decile: the `⌈N/10⌉`-th smallest value.
pub fn decile_accuracy(final_errors: &[f64]) -> Result<f64> {
    if final_errors.is_empty() {
        return Err(Error::EmptyInput("decile of an empty error list"));
    }
    let mut sorted = final_errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = final_errors.len().div_ceil(10);
    Ok(sorted[rank - 1])
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("median of an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Ok(if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) })
}

/// First iteration whose recorded relative error is at most `target`.
pub fn iterations_to_target(traj: &Trajectory, target_error: f64) -> Option<usize> {
    traj.records.iter().find(|r| r.relative_error.is_some_and(|e| e <= target_error)).map(|r| r.iteration)
}

/// Circuit, Hamiltonian, initial state and reference energy for one VQE setting.
#[derive(Debug, Clone)]
pub struct VqeProblem {
    circuit: Circuit,
    hamiltonian: PauliSum,
    init: InitStateSpec,
    ground_energy: f64,
    exact: ExactEvaluator,
}

impl VqeProblem {
    pub fn new(circuit: Circuit, hamiltonian: PauliSum, init: InitStateSpec, ground_energy: f64) -> Result<Self> {
        if ground_energy == 0.0 {
            return Err(Error::UndefinedMetric);
        }
        let exact = ExactEvaluator::new(&circuit, &hamiltonian, &init)?;
        Ok(Self { circuit, hamiltonian, init, ground_energy, exact })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn init(&self) -> &InitStateSpec {
        &self.init
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn exact(&self) -> &ExactEvaluator {
        &self.exact
    }

    pub fn lwpp(&self, cfg: &TruncationConfig) -> Result<LwppEvaluator> {
        LwppEvaluator::new(&self.circuit, &self.hamiltonian, &self.init, cfg)
    }

    pub fn relative_error(&self, energy: f64) -> f64 {
        (energy - self.ground_energy).abs() / self.ground_energy.abs()
    }
}

/// Exact-energy optimization; every record carries the exact energy and its
/// relative error.
pub fn direct_optimize(problem: &VqeProblem, cfg: &AdamConfig, start: &[f64]) -> Result<Trajectory> {
    let exact = problem.exact();
    let (_, traj) = minimize_adam_with(
        |p| exact.energy_and_gradient(p),
        start,
        cfg,
        Stage::Main,
        |rec, _| {
            rec.exact_energy = Some(rec.cost);
            rec.relative_error = Some(problem.relative_error(rec.cost));
            Ok(())
        },
    )?;
    Ok(traj)
}

/// LWPP-cost optimization. The exact energy is evaluated at iteration 1, every
/// `exact_log_every` iterations, on the last record, and at the final
/// parameters.
pub fn lwpp_optimize(
    problem: &VqeProblem,
    lwpp: &LwppEvaluator,
    cfg: &AdamConfig,
    start: &[f64],
    exact_log_every: usize,
) -> Result<Trajectory> {
    let exact = problem.exact();
    let (params, mut traj) = minimize_adam_with(
        |p| lwpp.energy_and_gradient(p),
        start,
        cfg,
        Stage::Pre,
        |rec, p| {
            let due = rec.iteration == 1 || rec.iteration == cfg.iterations || rec.iteration % exact_log_every == 0;
            if exact_log_every > 0 && due {
                let e = exact.energy(p)?;
                rec.exact_energy = Some(e);
                rec.relative_error = Some(problem.relative_error(e));
            }
            Ok(())
        },
    )?;
    let e = exact.energy(&params)?;
    traj.final_exact_energy = Some(e);
    traj.final_relative_error = Some(problem.relative_error(e));
    // An early stop leaves the parameters of the last record in place.
    if let Some(last) = traj.records.last_mut() {
        if traj.stop == StopReason::GradientTolerance && exact_log_every > 0 && last.exact_energy.is_none() {
            last.exact_energy = Some(e);
            last.relative_error = traj.final_relative_error;
        }
    }
    Ok(traj)
}

/// LWPP pre-optimization from `start`, then exact optimization from its result.
/// A zero pre-stage budget hands `start` straight to the exact stage.
pub fn two_stage(
    problem: &VqeProblem,
    lwpp: &LwppEvaluator,
    pre_cfg: &AdamConfig,
    main_cfg: &AdamConfig,
    start: &[f64],
    exact_log_every: usize,
) -> Result<(Trajectory, Trajectory)> {
    let pre = lwpp_optimize(problem, lwpp, pre_cfg, start, exact_log_every)?;
    let main = direct_optimize(problem, main_cfg, &pre.final_params)?;
    Ok((pre, main))
}

/// Draws the starting point from `init_mode` with `seed` and runs [`two_stage`].
pub fn two_stage_optimize(
    problem: &VqeProblem,
    lwpp_cfg: &TruncationConfig,
    pre_cfg: &AdamConfig,
    main_cfg: &AdamConfig,
    init_mode: &InitMode,
    seed: u64,
    exact_log_every: usize,
) -> Result<(Trajectory, Trajectory)> {
    let start = init_mode.draw(problem.circuit().param_count(), seed)?;
    let lwpp = problem.lwpp(lwpp_cfg)?;
    two_stage(problem, &lwpp, pre_cfg, main_cfg, &start, exact_log_every)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(p: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((p[0] * p[0], vec![2.0 * p[0]]))
    }

    /// Textbook Adam written out independently for a scalar parameter.
    fn reference_adam_scalar(mut theta: f64, lr: f64, steps: usize) -> f64 {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=steps {
            let g = 2.0 * theta;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t as i32));
            let vh = v / (1.0 - b2.powi(t as i32));
            theta -= lr * mh / (vh.sqrt() + eps);
        }
        theta
    }

    #[test]
    fn adam_quadratic_matches_reference() {
        let cfg = AdamConfig { iterations: 2000, ..AdamConfig::default() };
        let (p, traj) = minimize_adam(quadratic, &[1.0], &cfg).unwrap();
        let reference = reference_adam_scalar(1.0, 0.01, 2000);
        assert!(reference.abs() < 1e-3);
        assert!(p[0].abs() < 1e-3);
        assert!((p[0] - reference).abs() < 1e-12);
        assert_eq!(traj.records.len(), 2000);
        assert!(traj.records.iter().enumerate().all(|(i, r)| r.iteration == i + 1));
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let cfg = AdamConfig::with_iterations(50);
        let (p, _) = minimize_adam(|_| Ok((3.0, vec![0.0, 0.0])), &[0.4, -1.2], &cfg).unwrap();
        assert_eq!(p, vec![0.4, -1.2]);
    }

    #[test]
    fn deterministic() {
        let cfg = AdamConfig::with_iterations(100);
        let f = |p: &[f64]| Ok(((p[0] - 1.0).powi(2) + p[1].sin(), vec![2.0 * (p[0] - 1.0), p[1].cos()]));
        let (a, ta) = minimize_adam(f, &[0.3, 0.2], &cfg).unwrap();
        let (b, tb) = minimize_adam(f, &[0.3, 0.2], &cfg).unwrap();
        assert_eq!(a, b);
        let strip = |t: &Trajectory| t.records.iter().map(|r| (r.cost, r.grad_norm)).collect::<Vec<_>>();
        assert_eq!(strip(&ta), strip(&tb));
    }

    #[test]
    fn non_finite_aborts_with_record() {
        let cfg = AdamConfig::with_iterations(10);
        let mut calls = 0;
        let err = minimize_adam(
            |p| {
                calls += 1;
                Ok((if calls == 3 { f64::NAN } else { p[0] }, vec![1.0]))
            },
            &[0.0],
            &cfg,
        )
        .unwrap_err();
        match err {
            Error::NonFinite { iteration, trajectory } => {
                assert_eq!(iteration, 3);
                assert_eq!(trajectory.records.len(), 3);
                assert_eq!(trajectory.stop, StopReason::NonFinite);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gradient_tolerance_stops_early() {
        let cfg = AdamConfig { iterations: 100, stop_grad_norm: Some(0.5), ..AdamConfig::default() };
        let (p, traj) = minimize_adam(|_| Ok((0.0, vec![0.1])), &[2.0], &cfg).unwrap();
        assert_eq!(traj.records.len(), 1);
        assert_eq!(traj.stop, StopReason::GradientTolerance);
        assert_eq!(p, vec![2.0]);
    }

    #[test]
    fn learning_rate_bounds_step() {
        let cfg = AdamConfig { iterations: 200, learning_rate: 1e-6, ..AdamConfig::default() };
        let (p, _) = minimize_adam(|p| Ok((p[0].cos(), vec![-p[0].sin() * 3.0])), &[1.0], &cfg).unwrap();
        // Each Adam step moves a parameter by at most ~lr.
        assert!((p[0] - 1.0).abs() <= 200.0 * 1e-6 * 1.0001);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(-10.0, -10.0).unwrap(), 0.0);
        assert!((relative_error(-9.0, -10.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(relative_error(0.0, -4.6).unwrap(), 1.0);
        assert_eq!(relative_error(1.0, 0.0), Err(Error::UndefinedMetric));
    }

    #[test]
    fn decile_examples() {
        let errors: Vec<f64> = (1..=20).map(|i| 0.01 * i as f64).collect();
        assert_eq!(decile_accuracy(&errors).unwrap(), 0.02);
        assert_eq!(decile_accuracy(&[0.7]).unwrap(), 0.7);
        assert_eq!(decile_accuracy(&[0.3; 7]).unwrap(), 0.3);
        assert!(decile_accuracy(&[]).is_err());
        let thirty: Vec<f64> = (1..=30).map(f64::from).collect();
        assert_eq!(decile_accuracy(&thirty).unwrap(), 3.0);
    }

    fn traj_with_errors(errors: &[f64]) -> Trajectory {
        Trajectory {
            stage: Stage::Main,
            records: errors
                .iter()
                .enumerate()
                .map(|(i, &e)| IterationRecord {
                    iteration: i + 1,
                    cost: 0.0,
                    exact_energy: None,
                    relative_error: Some(e),
                    grad_norm: 0.0,
                    wall_ms: 0.0,
                })
                .collect(),
            final_params: vec![],
            stop: StopReason::Budget,
            final_exact_energy: None,
            final_relative_error: None,
        }
    }

    #[test]
    fn iterations_to_target_examples() {
        let t = traj_with_errors(&[0.5, 0.2, 0.05]);
        assert_eq!(iterations_to_target(&t, 0.1), Some(3));
        assert_eq!(iterations_to_target(&t, 0.6), Some(1));
        assert_eq!(iterations_to_target(&t, 0.01), None);
    }

    #[test]
    fn init_modes() {
        let r = InitMode::Random.draw(100, 4).unwrap();
        assert!(r.iter().all(|x| x.abs() <= std::f64::consts::PI));
        assert!(r.iter().any(|x| x.abs() > 1.0));
        let n = InitMode::NearIdentity.draw(100, 4).unwrap();
        assert!(n.iter().all(|x| x.abs() <= 0.01 * std::f64::consts::PI));
        assert_eq!(InitMode::Random.draw(10, 9).unwrap(), InitMode::Random.draw(10, 9).unwrap());
        assert!(InitMode::Explicit(vec![0.0; 3]).draw(4, 0).is_err());
    }
}
