//! Scenario dispatch and run orchestration.
//!
//! An experiment has one setting per circuit depth. Every setting runs
//! `runs_per_setting` seeded runs, and each run index draws one starting
//! point that all strategies of that run share. Runs are scheduled on a
//! bounded worker pool and collected in job order, so outputs do not depend
//! on the thread count.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use pauliprop_core::rng::{derive_seed, RNG_NAME};
use pauliprop_core::spectrum::ground_state_energy;
use pauliprop_core::{
    build_ansatz, build_hamiltonian, build_rugged_ansatz, build_singlet_pairing, direct_optimize, lwpp_optimize,
    optim::minimize_adam_with, Error as EngineError, Lattice, LwppEvaluator, Stage, StopReason, Trajectory, VqeProblem,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Scenario, Strategy};
use crate::error::{ConfigError, HarnessError, Result};
use crate::records::{
    emit_csv, failed_runs, summarize, write_manifest, GroundStateRecord, ParameterRow, RunEntry, RunManifest, RunRow,
    RunStatus, SettingRecord, SummaryRow, Timestamps, TrajectoryRow, WriteOutcome, MANIFEST_FILE, PARAMETERS_FILE,
    PARAMETER_COLUMNS, RUNS_FILE, RUN_COLUMNS, SUMMARY_COLUMNS, SUMMARY_FILE, TRAJECTORY_COLUMNS, TRAJECTORY_FILE,
};
use crate::resample::resample_parameters;

/// Stream index for the fixed angles of the rugged ansatz, one draw per
/// setting.
const RUGGED_STREAM: u64 = u64::MAX;
/// Stream index for the bootstrap draw of a resampled run.
const RESAMPLE_STREAM: u64 = u64::MAX - 1;

struct Setting {
    index: usize,
    depth: usize,
    problem: VqeProblem,
    rugged_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Direct,
    LwppInit(usize),
    /// Direct run with LWPP estimates for every k along the way.
    ExactPathEval,
    LwppOpt(usize),
    /// LWPP warm start plus an exact run from resampled parameters.
    LwppInitResampled(usize),
}

#[derive(Debug, Clone, Copy)]
struct Job {
    setting: usize,
    run: usize,
    unit: Unit,
}

fn units(cfg: &ExperimentConfig) -> Vec<Unit> {
    let ks = cfg.k_values.iter().copied();
    match cfg.scenario {
        Scenario::EvalOnExactPath => vec![Unit::ExactPathEval],
        Scenario::LwppOptExactEval => ks.map(Unit::LwppOpt).collect(),
        Scenario::RandomInitCompare | Scenario::NearIdentityCompare | Scenario::RuggedLandscape => {
            std::iter::once(Unit::Direct).chain(ks.map(Unit::LwppInit)).collect()
        }
        Scenario::ResamplingControl => ks.map(Unit::LwppInitResampled).collect(),
    }
}

fn unit_for_strategy(strategy: Strategy, k: usize) -> Unit {
    match strategy {
        Strategy::Direct => Unit::Direct,
        Strategy::LwppInit => Unit::LwppInit(k),
        Strategy::LwppEval => Unit::ExactPathEval,
        Strategy::LwppOpt => Unit::LwppOpt(k),
        Strategy::Resampled => Unit::LwppInitResampled(k),
    }
}

/// Everything an experiment produced, before it is written anywhere.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub ground_state: GroundStateRecord,
    pub settings: Vec<SettingRecord>,
    pub rows: Vec<TrajectoryRow>,
    pub runs: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
    pub parameters: Vec<ParameterRow>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

impl ExperimentOutput {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Failed).count()
    }

    /// Trajectory rows of one run, in order.
    pub fn run_rows<'a>(
        &'a self,
        run_id: &'a str,
        strategy: &'a str,
        k: Option<usize>,
    ) -> impl Iterator<Item = &'a TrajectoryRow> + 'a {
        self.rows.iter().filter(move |r| r.run_id == run_id && r.strategy == strategy && r.k == k)
    }

    pub fn summary_for(&self, depth: usize, strategy: Strategy, k: Option<usize>) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.depth == depth && s.strategy == strategy.as_str() && s.k == k)
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Exact ground-state energy of the configured Hamiltonian, reusing a cached
/// entry when one matches.
pub fn ground_state(cfg: &ExperimentConfig, cache: &[GroundStateRecord]) -> Result<GroundStateRecord> {
    let j = (cfg.couplings.jx, cfg.couplings.jy, cfg.couplings.jz);
    if let Some(hit) = cache.iter().find(|g| g.matches(cfg.rows, cfg.cols, j)) {
        info!("ground state {}x{} taken from manifest: {}", cfg.rows, cfg.cols, hit.energy);
        return Ok(hit.clone());
    }
    let lattice = Lattice::new(cfg.rows, cfg.cols)?;
    let energy = ground_state_energy(&build_hamiltonian(&lattice, j.0, j.1, j.2))?;
    info!("ground state {}x{}: {energy}", cfg.rows, cfg.cols);
    Ok(GroundStateRecord {
        lattice_rows: cfg.rows,
        lattice_cols: cfg.cols,
        jx: j.0,
        jy: j.1,
        jz: j.2,
        energy,
        method: "lanczos".into(),
    })
}

fn build_settings(cfg: &ExperimentConfig, gs: f64) -> Result<Vec<Setting>> {
    if gs == 0.0 {
        return Err(EngineError::UndefinedMetric.into());
    }
    let lattice = Lattice::new(cfg.rows, cfg.cols)?;
    let h = build_hamiltonian(&lattice, cfg.couplings.jx, cfg.couplings.jy, cfg.couplings.jz);
    let init = build_singlet_pairing(&lattice);
    cfg.depths
        .iter()
        .enumerate()
        .map(|(index, &depth)| {
            let (circuit, rugged_seed) = if cfg.scenario == Scenario::RuggedLandscape {
                let seed = derive_seed(cfg.master_seed, index as u64, RUGGED_STREAM);
                (build_rugged_ansatz(&lattice, depth, seed)?, Some(seed))
            } else {
                (build_ansatz(&lattice, depth)?, None)
            };
            let problem = VqeProblem::new(circuit, h.clone(), init.clone(), gs)?;
            Ok(Setting { index, depth, problem, rugged_seed })
        })
        .collect()
}

struct RunOutcome {
    row: RunRow,
    trajectory: Vec<TrajectoryRow>,
    parameters: Vec<ParameterRow>,
}

impl RunOutcome {
    fn with_params(mut self, meta: &Meta, points: &[(&str, &[f64])]) -> Self {
        for (point, values) in points {
            self.parameters.extend(values.iter().enumerate().map(|(index, &value)| ParameterRow {
                run_id: meta.run_id.clone(),
                seed: meta.seed,
                strategy: self.row.strategy.clone(),
                depth: meta.depth,
                k: self.row.k,
                point: point.to_string(),
                index,
                value,
            }));
        }
        self
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
}

struct Meta<'a> {
    cfg: &'a ExperimentConfig,
    run_id: String,
    seed: u64,
    depth: usize,
}

impl Meta<'_> {
    fn row(&self, strategy: Strategy, k: Option<usize>, stage: Stage, iteration: usize, cost: f64) -> TrajectoryRow {
        TrajectoryRow {
            run_id: self.run_id.clone(),
            seed: self.seed,
            scenario: self.cfg.scenario.as_str().into(),
            strategy: strategy.as_str().into(),
            lattice_rows: self.cfg.rows,
            lattice_cols: self.cfg.cols,
            depth: self.depth,
            k,
            stage: stage.as_str().into(),
            iteration,
            cost_value: cost,
            exact_energy: None,
            relative_error: None,
            grad_norm: None,
            wall_ms: None,
        }
    }

    fn rows_of(&self, strategy: Strategy, k: Option<usize>, traj: &Trajectory) -> Vec<TrajectoryRow> {
        traj.records
            .iter()
            .map(|r| TrajectoryRow {
                exact_energy: r.exact_energy,
                relative_error: r.relative_error,
                grad_norm: Some(r.grad_norm),
                wall_ms: self.cfg.record_wall_time.then_some(r.wall_ms),
                ..self.row(strategy, k, traj.stage, r.iteration, r.cost)
            })
            .collect()
    }

    fn outcome(
        &self,
        strategy: Strategy,
        k: Option<usize>,
        stages: &[&Trajectory],
        rows: Vec<TrajectoryRow>,
    ) -> RunOutcome {
        let count = |s: Stage| stages.iter().filter(|t| t.stage == s).map(|t| t.records.len()).sum();
        let last = stages.last();
        let final_exact = last.and_then(|t| t.final_exact_energy);
        RunOutcome {
            row: RunRow {
                run_id: self.run_id.clone(),
                seed: self.seed,
                scenario: self.cfg.scenario.as_str().into(),
                strategy: strategy.as_str().into(),
                depth: self.depth,
                k,
                status: RunStatus::Ok,
                pre_iterations: count(Stage::Pre),
                main_iterations: count(Stage::Main),
                stop: last.map(|t| stop_name(t.stop).to_string()),
                final_cost: rows.last().map(|r| r.cost_value),
                final_exact_energy: final_exact,
                final_relative_error: last.and_then(|t| t.final_relative_error),
                error: None,
            },
            trajectory: rows,
            parameters: Vec::new(),
        }
    }

    fn failure(&self, strategy: Strategy, k: Option<usize>, err: &EngineError) -> RunOutcome {
        warn!("run {} {strategy} k={k:?} failed: {err}", self.run_id);
        let rows = match err {
            EngineError::NonFinite { trajectory, .. } => self.rows_of(strategy, k, trajectory),
            _ => Vec::new(),
        };
        let mut out = self.outcome(strategy, k, &[], rows);
        out.row.status = RunStatus::Failed;
        out.row.error = Some(err.to_string());
        out
    }
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Budget => "budget",
        StopReason::GradientTolerance => "gradient_tolerance",
        StopReason::NonFinite => "non_finite",
    }
}

/// Exact energy at the final parameters of a direct-style stage.
fn finish_exact(problem: &VqeProblem, mut traj: Trajectory) -> pauliprop_core::Result<Trajectory> {
    let e = problem.exact().energy(&traj.final_params)?;
    traj.final_exact_energy = Some(e);
    traj.final_relative_error = Some(problem.relative_error(e));
    Ok(traj)
}

impl Runner<'_> {
    fn run(&self, setting: &Setting, job: Job) -> Vec<RunOutcome> {
        let cfg = self.cfg;
        let seed = derive_seed(cfg.master_seed, setting.index as u64, job.run as u64);
        let meta = Meta { cfg, run_id: format!("d{}-r{:03}", setting.depth, job.run), seed, depth: setting.depth };
        let problem = &setting.problem;
        let start = match cfg.init_mode.draw(problem.circuit().param_count(), seed) {
            Ok(s) => s,
            Err(e) => return vec![meta.failure(Strategy::Direct, None, &e)],
        };
        let log_every = cfg.budget.exact_log_every;

        match job.unit {
            Unit::Direct => {
                let res = direct_optimize(problem, &cfg.main_adam(), &start).and_then(|t| finish_exact(problem, t));
                vec![match res {
                    Ok(t) => meta
                        .outcome(Strategy::Direct, None, &[&t], meta.rows_of(Strategy::Direct, None, &t))
                        .with_params(&meta, &[("initial", &start), ("final", &t.final_params)]),
                    Err(e) => meta.failure(Strategy::Direct, None, &e),
                }]
            }
            Unit::LwppOpt(k) => {
                let res = problem
                    .lwpp(&cfg.truncation(k))
                    .and_then(|lw| lwpp_optimize(problem, &lw, &cfg.pre_adam(), &start, log_every));
                vec![match res {
                    Ok(t) => meta
                        .outcome(Strategy::LwppOpt, Some(k), &[&t], meta.rows_of(Strategy::LwppOpt, Some(k), &t))
                        .with_params(&meta, &[("initial", &start), ("final", &t.final_params)]),
                    Err(e) => meta.failure(Strategy::LwppOpt, Some(k), &e),
                }]
            }
            Unit::LwppInit(k) => vec![self
                .lwpp_init(&meta, problem, k, &start)
                .map_or_else(|e| meta.failure(Strategy::LwppInit, Some(k), &e), |(out, _)| out)],
            Unit::LwppInitResampled(k) => {
                let (init_out, pre_params) = match self.lwpp_init(&meta, problem, k, &start) {
                    Ok(v) => v,
                    Err(e) => return vec![meta.failure(Strategy::LwppInit, Some(k), &e)],
                };
                let resample_seed = derive_seed(seed, RESAMPLE_STREAM, k as u64);
                let resampled = match resample_parameters(&pre_params, resample_seed) {
                    Ok(p) => p,
                    Err(e) => {
                        let mut out = meta.outcome(Strategy::Resampled, Some(k), &[], Vec::new());
                        out.row.status = RunStatus::Failed;
                        out.row.error = Some(e.to_string());
                        return vec![init_out, out];
                    }
                };
                let res = direct_optimize(problem, &cfg.main_adam(), &resampled).and_then(|t| finish_exact(problem, t));
                let out = match res {
                    Ok(t) => meta
                        .outcome(Strategy::Resampled, Some(k), &[&t], meta.rows_of(Strategy::Resampled, Some(k), &t))
                        .with_params(&meta, &[("initial", &resampled), ("final", &t.final_params)]),
                    Err(e) => meta.failure(Strategy::Resampled, Some(k), &e),
                };
                vec![init_out, out]
            }
            Unit::ExactPathEval => self.exact_path_eval(&meta, problem, &start),
        }
    }

    /// Returns the outcome and the parameters found by the LWPP stage.
    fn lwpp_init(
        &self,
        meta: &Meta,
        problem: &VqeProblem,
        k: usize,
        start: &[f64],
    ) -> pauliprop_core::Result<(RunOutcome, Vec<f64>)> {
        let cfg = self.cfg;
        let lwpp = problem.lwpp(&cfg.truncation(k))?;
        let pre = lwpp_optimize(problem, &lwpp, &cfg.pre_adam(), start, cfg.budget.exact_log_every)?;
        let main = finish_exact(problem, direct_optimize(problem, &cfg.main_adam(), &pre.final_params)?)?;
        let mut rows = meta.rows_of(Strategy::LwppInit, Some(k), &pre);
        rows.extend(meta.rows_of(Strategy::LwppInit, Some(k), &main));
        let out = meta
            .outcome(Strategy::LwppInit, Some(k), &[&pre, &main], rows)
            .with_params(meta, &[("initial", start), ("pre_final", &pre.final_params), ("final", &main.final_params)]);
        Ok((out, pre.final_params))
    }

    fn exact_path_eval(&self, meta: &Meta, problem: &VqeProblem, start: &[f64]) -> Vec<RunOutcome> {
        let cfg = self.cfg;
        let evaluators: Vec<(usize, LwppEvaluator)> = match cfg
            .k_values
            .iter()
            .map(|&k| problem.lwpp(&cfg.truncation(k)).map(|e| (k, e)))
            .collect::<pauliprop_core::Result<_>>()
        {
            Ok(v) => v,
            Err(e) => return vec![meta.failure(Strategy::Direct, None, &e)],
        };
        let exact = problem.exact();
        let main = cfg.main_adam();
        let mut estimates: Vec<Vec<TrajectoryRow>> = vec![Vec::new(); evaluators.len()];
        let res = minimize_adam_with(
            |p| exact.energy_and_gradient(p),
            start,
            &main,
            Stage::Main,
            |rec, params| {
                rec.exact_energy = Some(rec.cost);
                rec.relative_error = Some(problem.relative_error(rec.cost));
                let it = rec.iteration;
                if it == 1 || it == main.iterations || it % cfg.budget.exact_log_every == 0 {
                    for ((k, ev), rows) in evaluators.iter().zip(&mut estimates) {
                        let mut row = meta.row(Strategy::LwppEval, Some(*k), Stage::Main, it, ev.energy(params)?);
                        row.exact_energy = rec.exact_energy;
                        row.relative_error = rec.relative_error;
                        rows.push(row);
                    }
                }
                Ok(())
            },
        );
        let traj = match res.and_then(|(_, t)| finish_exact(problem, t)) {
            Ok(t) => t,
            Err(e) => return vec![meta.failure(Strategy::Direct, None, &e)],
        };
        let mut out = vec![meta
            .outcome(Strategy::Direct, None, &[&traj], meta.rows_of(Strategy::Direct, None, &traj))
            .with_params(meta, &[("initial", start), ("final", &traj.final_params)])];
        for ((k, _), rows) in evaluators.iter().zip(estimates) {
            let mut o = meta.outcome(Strategy::LwppEval, Some(*k), &[&traj], rows);
            o.row.pre_iterations = 0;
            out.push(o);
        }
        out
    }
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Other(format!("cannot start worker pool: {e}")))
}

fn assemble(
    cfg: &ExperimentConfig,
    gs: GroundStateRecord,
    settings: &[Setting],
    outcomes: Vec<RunOutcome>,
    started_unix: u64,
) -> ExperimentOutput {
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut parameters = Vec::new();
    for o in outcomes {
        rows.extend(o.trajectory);
        parameters.extend(o.parameters);
        runs.push(o.row);
    }
    let summary = summarize(&rows, &failed_runs(&runs));
    ExperimentOutput {
        config: cfg.clone(),
        ground_state: gs,
        settings: settings
            .iter()
            .map(|s| SettingRecord {
                index: s.index,
                depth: s.depth,
                param_count: s.problem.circuit().param_count(),
                gate_count: s.problem.circuit().gates().len(),
                rugged_seed: s.rugged_seed,
            })
            .collect(),
        rows,
        runs,
        summary,
        parameters,
        started_unix,
        finished_unix: unix_now(),
    }
}

/// Runs every job of the experiment on `threads` workers (0 picks the number
/// of cores) without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig, threads: usize, cache: &[GroundStateRecord]) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let started = unix_now();
    let gs = ground_state(cfg, cache)?;
    let settings = build_settings(cfg, gs.energy)?;
    let units = units(cfg);
    let jobs: Vec<Job> = settings
        .iter()
        .flat_map(|s| {
            let units = &units;
            (0..cfg.runs_per_setting)
                .flat_map(move |run| units.iter().map(move |&unit| Job { setting: s.index, run, unit }))
        })
        .collect();
    info!("{}: {} settings, {} jobs", cfg.scenario, settings.len(), jobs.len());
    let runner = Runner { cfg };
    let outcomes: Vec<RunOutcome> = build_pool(threads)?.install(|| {
        jobs.par_iter()
            .flat_map_iter(|job| {
                let out = runner.run(&settings[job.setting], *job);
                for o in &out {
                    info!(
                        "{} {} k={:?}: {:?} final error {:?}",
                        o.row.run_id, o.row.strategy, o.row.k, o.row.status, o.row.final_relative_error
                    );
                }
                out
            })
            .collect()
    });
    Ok(assemble(cfg, gs, &settings, outcomes, started))
}

/// One run of `cfg.strategy` at the first depth and first k.
pub fn execute_single(cfg: &ExperimentConfig, cache: &[GroundStateRecord]) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let strategy = cfg.strategy.ok_or_else(|| ConfigError::new("strategy", "required for a single run"))?;
    let started = unix_now();
    let gs = ground_state(cfg, cache)?;
    let mut settings = build_settings(cfg, gs.energy)?;
    settings.truncate(1);
    let job = Job { setting: 0, run: 0, unit: unit_for_strategy(strategy, cfg.k_values[0]) };
    let outcomes = Runner { cfg }.run(&settings[0], job);
    Ok(assemble(cfg, gs, &settings, outcomes, started))
}

/// Writes trajectory, run, summary and parameter CSVs plus the manifest into
/// `dir`.
pub fn emit_records(dir: &Path, output: &ExperimentOutput) -> Result<RunManifest> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut artifacts = Vec::new();
    for (artifact, outcome) in [
        emit_csv(dir, TRAJECTORY_FILE, &TRAJECTORY_COLUMNS, &output.rows)?,
        emit_csv(dir, RUNS_FILE, &RUN_COLUMNS, &output.runs)?,
        emit_csv(dir, SUMMARY_FILE, &SUMMARY_COLUMNS, &output.summary)?,
        emit_csv(dir, PARAMETERS_FILE, &PARAMETER_COLUMNS, &output.parameters)?,
    ] {
        if outcome == WriteOutcome::Verified {
            info!("{} unchanged", artifact.path);
        }
        artifacts.push(artifact);
    }
    let manifest = RunManifest {
        toolkit: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        rng: RNG_NAME.into(),
        scenario: output.config.scenario.as_str().into(),
        config: output.config.to_flat(),
        ground_states: vec![output.ground_state.clone()],
        settings: output.settings.clone(),
        runs: output
            .runs
            .iter()
            .map(|r| RunEntry {
                run_id: r.run_id.clone(),
                strategy: r.strategy.clone(),
                k: r.k,
                depth: r.depth,
                seed: r.seed,
                status: r.status,
                error: r.error.clone(),
            })
            .collect(),
        artifacts,
        timestamps: Timestamps { started_unix: output.started_unix, finished_unix: output.finished_unix },
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

/// Ground-state entries recorded by an earlier run into `dir`, if any.
pub fn cached_ground_states(dir: &Path) -> Vec<GroundStateRecord> {
    RunManifest::load(&dir.join(MANIFEST_FILE)).map(|m| m.ground_states).unwrap_or_default()
}

/// Executes the experiment and writes its outputs into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<(RunManifest, ExperimentOutput)> {
    let cache = cached_ground_states(&cfg.output_dir);
    let output = execute(cfg, threads, &cache)?;
    let manifest = emit_records(&cfg.output_dir, &output)?;
    Ok((manifest, output))
}

#[derive(Debug, Clone, Serialize)]
pub struct LwppEvaluation {
    pub k: usize,
    pub basis_size: usize,
    pub energy: f64,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub num_qubits: usize,
    pub depth: usize,
    pub param_count: usize,
    pub seed: u64,
    pub params: Vec<f64>,
    pub exact_energy: f64,
    pub exact_gradient: Vec<f64>,
    pub lwpp: Vec<LwppEvaluation>,
}

/// Exact and LWPP energies and gradients at the run-0 starting point of the
/// first depth.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let lattice = Lattice::new(cfg.rows, cfg.cols)?;
    let h = build_hamiltonian(&lattice, cfg.couplings.jx, cfg.couplings.jy, cfg.couplings.jz);
    let init = build_singlet_pairing(&lattice);
    let depth = cfg.depths[0];
    let circuit = if cfg.scenario == Scenario::RuggedLandscape {
        build_rugged_ansatz(&lattice, depth, derive_seed(cfg.master_seed, 0, RUGGED_STREAM))?
    } else {
        build_ansatz(&lattice, depth)?
    };
    let seed = derive_seed(cfg.master_seed, 0, 0);
    let params = cfg.init_mode.draw(circuit.param_count(), seed)?;
    let (exact_energy, exact_gradient) = pauliprop_core::exact_energy_and_gradient(&circuit, &params, &h, &init)?;
    let lwpp = cfg
        .k_values
        .iter()
        .map(|&k| {
            let ev = LwppEvaluator::new(&circuit, &h, &init, &cfg.truncation(k))?;
            let (energy, gradient) = ev.energy_and_gradient(&params)?;
            Ok(LwppEvaluation { k, basis_size: ev.basis_len(), energy, gradient })
        })
        .collect::<pauliprop_core::Result<Vec<_>>>()?;
    Ok(EvaluationReport {
        num_qubits: cfg.num_qubits(),
        depth,
        param_count: circuit.param_count(),
        seed,
        params,
        exact_energy,
        exact_gradient,
        lwpp,
    })
}
