//! Output schemas and file emission.
//!
//! Every experiment writes `trajectories.csv`, `runs.csv`, `summary.csv`,
//! `parameters.csv` and `manifest.json` into its output directory. Files are replaced atomically
//! and an existing file with identical content is left untouched.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pauliprop_core::optim::{decile_accuracy, median};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::FlatConfig;
use crate::error::{HarnessError, Result};

pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PARAMETERS_FILE: &str = "parameters.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const TRAJECTORY_COLUMNS: [&str; 15] = [
    "run_id",
    "seed",
    "scenario",
    "strategy",
    "lattice_rows",
    "lattice_cols",
    "depth",
    "k",
    "stage",
    "iteration",
    "cost_value",
    "exact_energy",
    "relative_error",
    "grad_norm",
    "wall_ms",
];

/// One optimizer iteration (or one logged evaluation) of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub run_id: String,
    pub seed: u64,
    pub scenario: String,
    pub strategy: String,
    pub lattice_rows: usize,
    pub lattice_cols: usize,
    pub depth: usize,
    pub k: Option<usize>,
    pub stage: String,
    pub iteration: usize,
    pub cost_value: f64,
    pub exact_energy: Option<f64>,
    pub relative_error: Option<f64>,
    pub grad_norm: Option<f64>,
    pub wall_ms: Option<f64>,
}

pub const RUN_COLUMNS: [&str; 14] = [
    "run_id",
    "seed",
    "scenario",
    "strategy",
    "depth",
    "k",
    "status",
    "pre_iterations",
    "main_iterations",
    "stop",
    "final_cost",
    "final_exact_energy",
    "final_relative_error",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run_id: String,
    pub seed: u64,
    pub scenario: String,
    pub strategy: String,
    pub depth: usize,
    pub k: Option<usize>,
    pub status: RunStatus,
    pub pre_iterations: usize,
    pub main_iterations: usize,
    pub stop: Option<String>,
    pub final_cost: Option<f64>,
    /// Exact energy at the parameters the run ended with.
    pub final_exact_energy: Option<f64>,
    pub final_relative_error: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

pub const PARAMETER_COLUMNS: [&str; 8] = ["run_id", "seed", "strategy", "depth", "k", "point", "index", "value"];

/// One entry of a parameter vector. `point` is `initial`, `pre_final` (end of
/// the LWPP stage) or `final`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub run_id: String,
    pub seed: u64,
    pub strategy: String,
    pub depth: usize,
    pub k: Option<usize>,
    pub point: String,
    pub index: usize,
    pub value: f64,
}

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "scenario",
    "lattice_rows",
    "lattice_cols",
    "depth",
    "strategy",
    "k",
    "runs",
    "decile_relative_error",
    "median_relative_error",
    "best_relative_error",
    "median_final_cost",
    "target_runs",
    "reached_target",
    "median_iterations_to_target",
];

/// Aggregates over the runs of one (depth, strategy, k) cell.
///
/// A run's final error is the relative error on its last row that carries
/// one. `lwpp_init` runs are scored against the final error of the `direct`
/// run with the same `run_id`; runs that never reach it count as infinitely
/// slow in the median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub lattice_rows: usize,
    pub lattice_cols: usize,
    pub depth: usize,
    pub strategy: String,
    pub k: Option<usize>,
    pub runs: usize,
    pub decile_relative_error: Option<f64>,
    pub median_relative_error: Option<f64>,
    pub best_relative_error: Option<f64>,
    pub median_final_cost: Option<f64>,
    pub target_runs: usize,
    pub reached_target: usize,
    pub median_iterations_to_target: Option<f64>,
}

type RunKey = (String, String, Option<usize>);

/// Identifies a run within one experiment.
pub fn run_key(run_id: &str, strategy: &str, k: Option<usize>) -> RunKey {
    (run_id.to_string(), strategy.to_string(), k)
}

struct RunView<'a> {
    key: RunKey,
    rows: Vec<&'a TrajectoryRow>,
}

impl RunView<'_> {
    fn final_error(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.relative_error)
    }

    fn first_main_iteration_at_or_below(&self, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .filter(|r| r.stage == "main")
            .find(|r| r.relative_error.is_some_and(|e| e <= target))
            .map(|r| r.iteration)
    }
}

fn group_runs<'a>(rows: &'a [TrajectoryRow], skip: &HashSet<RunKey>) -> Vec<RunView<'a>> {
    let mut order: Vec<RunView<'a>> = Vec::new();
    let mut index: HashMap<RunKey, usize> = HashMap::new();
    for row in rows {
        let key = run_key(&row.run_id, &row.strategy, row.k);
        if skip.contains(&key) {
            continue;
        }
        let i = *index.entry(key.clone()).or_insert_with(|| {
            order.push(RunView { key, rows: Vec::new() });
            order.len() - 1
        });
        order[i].rows.push(row);
    }
    order
}

fn strategy_rank(s: &str) -> usize {
    crate::config::Strategy::ALL.iter().position(|x| x.as_str() == s).unwrap_or(usize::MAX)
}

/// Summary table computed from trajectory rows alone. Runs in `failed` are
/// left out.
pub fn summarize(rows: &[TrajectoryRow], failed: &HashSet<RunKey>) -> Vec<SummaryRow> {
    let runs = group_runs(rows, failed);
    let direct_final: HashMap<&str, f64> = runs
        .iter()
        .filter(|r| r.key.1 == "direct")
        .filter_map(|r| r.final_error().map(|e| (r.key.0.as_str(), e)))
        .collect();

    let mut cells: BTreeMap<(usize, usize, Option<usize>), Vec<&RunView>> = BTreeMap::new();
    for run in &runs {
        let first = run.rows[0];
        cells.entry((first.depth, strategy_rank(&first.strategy), first.k)).or_default().push(run);
    }

    cells
        .into_values()
        .map(|cell| {
            let first = cell[0].rows[0];
            let errors: Vec<f64> = cell.iter().filter_map(|r| r.final_error()).collect();
            let costs: Vec<f64> = cell.iter().map(|r| r.rows.last().unwrap().cost_value).collect();
            let mut steps = Vec::new();
            if first.strategy == "lwpp_init" {
                for run in &cell {
                    if let Some(target) = direct_final.get(run.key.0.as_str()) {
                        let hit = run.first_main_iteration_at_or_below(*target);
                        steps.push(hit.map_or(f64::INFINITY, |i| i as f64));
                    }
                }
            }
            SummaryRow {
                scenario: first.scenario.clone(),
                lattice_rows: first.lattice_rows,
                lattice_cols: first.lattice_cols,
                depth: first.depth,
                strategy: first.strategy.clone(),
                k: first.k,
                runs: cell.len(),
                decile_relative_error: decile_accuracy(&errors).ok(),
                median_relative_error: median(&errors).ok(),
                best_relative_error: errors.iter().copied().reduce(f64::min),
                median_final_cost: median(&costs).ok(),
                target_runs: steps.len(),
                reached_target: steps.iter().filter(|s| s.is_finite()).count(),
                median_iterations_to_target: median(&steps).ok(),
            }
        })
        .collect()
}

/// Keys of the failed runs in `runs`.
pub fn failed_runs(runs: &[RunRow]) -> HashSet<RunKey> {
    runs.iter().filter(|r| r.status == RunStatus::Failed).map(|r| run_key(&r.run_id, &r.strategy, r.k)).collect()
}

/// CSV text with the given header line followed by one line per row. An
/// empty `rows` yields the header alone.
pub fn to_csv<T: Serialize>(columns: &[&str], rows: &[T]) -> std::result::Result<Vec<u8>, csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|source| HarnessError::Csv { path: path.into(), source })?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|source| HarnessError::Csv { path: path.into(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteOutcome {
    Written,
    /// The file already held exactly these bytes.
    Verified,
}

/// Writes through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<WriteOutcome> {
    if fs::read(path).is_ok_and(|existing| existing == bytes) {
        return Ok(WriteOutcome::Verified);
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        HarnessError::io(path, e)
    })?;
    Ok(WriteOutcome::Written)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateRecord {
    pub lattice_rows: usize,
    pub lattice_cols: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub energy: f64,
    pub method: String,
}

impl GroundStateRecord {
    pub fn matches(&self, rows: usize, cols: usize, j: (f64, f64, f64)) -> bool {
        self.lattice_rows == rows
            && self.lattice_cols == cols
            && self.jx.to_bits() == j.0.to_bits()
            && self.jy.to_bits() == j.1.to_bits()
            && self.jz.to_bits() == j.2.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingRecord {
    pub index: usize,
    pub depth: usize,
    pub param_count: usize,
    pub gate_count: usize,
    /// Seed of the fixed rotation angles of the rugged ansatz.
    pub rugged_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub run_id: String,
    pub strategy: String,
    pub k: Option<usize>,
    pub depth: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub rng: String,
    pub scenario: String,
    pub config: FlatConfig,
    pub ground_states: Vec<GroundStateRecord>,
    pub settings: Vec<SettingRecord>,
    pub runs: Vec<RunEntry>,
    pub artifacts: Vec<Artifact>,
    pub timestamps: Timestamps,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })
    }

    fn same_content(&self, other: &RunManifest) -> bool {
        RunManifest { timestamps: other.timestamps.clone(), ..self.clone() } == *other
    }
}

/// Writes the manifest unless the existing one differs only in timestamps.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(PathBuf, WriteOutcome)> {
    let path = dir.join(MANIFEST_FILE);
    if let Ok(existing) = RunManifest::load(&path) {
        if manifest.same_content(&existing) {
            return Ok((path, WriteOutcome::Verified));
        }
    }
    let mut text =
        serde_json::to_string_pretty(manifest).map_err(|source| HarnessError::Json { path: path.clone(), source })?;
    text.push('\n');
    let outcome = write_atomic(&path, text.as_bytes())?;
    Ok((path, outcome))
}

/// Writes one CSV artifact and describes it for the manifest.
pub fn emit_csv<T: Serialize>(
    dir: &Path,
    name: &str,
    columns: &[&str],
    rows: &[T],
) -> Result<(Artifact, WriteOutcome)> {
    let path = dir.join(name);
    let bytes = to_csv(columns, rows).map_err(|source| HarnessError::Csv { path: path.clone(), source })?;
    let outcome = write_atomic(&path, &bytes)?;
    Ok((Artifact { path: name.to_string(), sha256: sha256_hex(&bytes), rows: rows.len() }, outcome))
}
