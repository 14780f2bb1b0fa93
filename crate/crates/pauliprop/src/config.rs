//! Experiment configuration.
//!
//! Configs are flat maps of dotted keys (`lattice.rows`, `adam.learning_rate`)
//! to JSON values. Nested JSON objects are accepted and flattened, so
//! `{"lattice": {"rows": 3}}` and `{"lattice.rows": 3}` are equivalent.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pauliprop_core::{AdamConfig, InitMode, TruncationConfig};
use serde_json::{json, Value};

use crate::error::ConfigError;

pub type FlatConfig = BTreeMap<String, Value>;

/// Environment variable that replaces `master_seed`.
pub const SEED_ENV: &str = "PAULIPROP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Exact optimization; the LWPP estimate is recorded along the path.
    EvalOnExactPath,
    /// LWPP-cost optimization with periodic exact evaluation.
    LwppOptExactEval,
    RandomInitCompare,
    NearIdentityCompare,
    /// LWPP warm start against a bootstrap-resampled copy of its parameters.
    ResamplingControl,
    /// Direct against LWPP-initialized runs on the ansatz with fixed random
    /// rotations after every trainable gate.
    RuggedLandscape,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::EvalOnExactPath,
        Scenario::LwppOptExactEval,
        Scenario::RandomInitCompare,
        Scenario::NearIdentityCompare,
        Scenario::ResamplingControl,
        Scenario::RuggedLandscape,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::EvalOnExactPath => "eval_on_exact_path",
            Scenario::LwppOptExactEval => "lwpp_opt_exact_eval",
            Scenario::RandomInitCompare => "random_init_compare",
            Scenario::NearIdentityCompare => "near_identity_compare",
            Scenario::ResamplingControl => "resampling_control",
            Scenario::RuggedLandscape => "rugged_landscape",
        }
    }

    fn default_init(self) -> InitMode {
        match self {
            Scenario::EvalOnExactPath | Scenario::RandomInitCompare => InitMode::Random,
            _ => InitMode::NearIdentity,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL.into_iter().find(|sc| sc.as_str() == s).ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

/// How a single run obtains its final parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    /// Exact optimization from the drawn start.
    Direct,
    /// LWPP pre-optimization, then exact optimization.
    LwppInit,
    /// LWPP estimates recorded along a direct run.
    LwppEval,
    /// LWPP optimization only, evaluated exactly.
    LwppOpt,
    /// Exact optimization from parameters resampled out of an LWPP result.
    Resampled,
}

impl Strategy {
    pub const ALL: [Strategy; 5] =
        [Strategy::Direct, Strategy::LwppInit, Strategy::LwppEval, Strategy::LwppOpt, Strategy::Resampled];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::LwppInit => "lwpp_init",
            Strategy::LwppEval => "lwpp_eval",
            Strategy::LwppOpt => "lwpp_opt",
            Strategy::Resampled => "resampled",
        }
    }

    /// Whether the strategy is parameterized by a truncation weight.
    pub fn uses_k(self) -> bool {
        !matches!(self, Strategy::Direct)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL.into_iter().find(|st| st.as_str() == s).ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub pre_iterations: usize,
    pub main_iterations: usize,
    /// Early stop of the LWPP stage; `None` runs the full budget.
    pub pre_grad_tol: Option<f64>,
    pub exact_log_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub rows: usize,
    pub cols: usize,
    pub depths: Vec<usize>,
    pub couplings: Couplings,
    pub k_values: Vec<usize>,
    pub coeff_epsilon: f64,
    pub path_coeff_cutoff: f64,
    pub init_mode: InitMode,
    pub runs_per_setting: usize,
    pub master_seed: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub budget: Budget,
    /// Used by the single-run command.
    pub strategy: Option<Strategy>,
    pub output_dir: PathBuf,
    pub record_wall_time: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "lattice.rows",
    "lattice.cols",
    "circuit.depths",
    "circuit.depth",
    "couplings.jx",
    "couplings.jy",
    "couplings.jz",
    "lwpp.k_values",
    "lwpp.k",
    "lwpp.coeff_epsilon",
    "lwpp.path_coeff_cutoff",
    "init.mode",
    "init.params",
    "runs_per_setting",
    "master_seed",
    "adam.learning_rate",
    "adam.beta1",
    "adam.beta2",
    "adam.eps",
    "budget.pre_iterations",
    "budget.main_iterations",
    "budget.pre_grad_tol",
    "budget.exact_log_every",
    "strategy",
    "output_dir",
    "output.record_wall_time",
];

/// Flattens nested objects into dotted keys. Arrays and scalars are leaves.
pub fn flatten(value: &Value) -> Result<FlatConfig, ConfigError> {
    fn walk(prefix: &str, value: &Value, out: &mut FlatConfig) -> Result<(), ConfigError> {
        match value {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out)?;
                }
                Ok(())
            }
            _ if prefix.is_empty() => Err(ConfigError::new("<root>", "config must be a JSON object")),
            _ => {
                if out.insert(prefix.to_string(), value.clone()).is_some() {
                    return Err(ConfigError::new(prefix, "given more than once"));
                }
                Ok(())
            }
        }
    }
    let mut out = FlatConfig::new();
    walk("", value, &mut out)?;
    Ok(out)
}

/// Parses config text (JSON).
pub fn parse_flat(text: &str) -> Result<FlatConfig, ConfigError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ConfigError::new("<file>", format!("invalid JSON: {e}")))?;
    flatten(&value)
}

/// Keys from `overlay` replace those in `base`.
pub fn merge(mut base: FlatConfig, overlay: FlatConfig) -> FlatConfig {
    // A single `lwpp.k` or `circuit.depth` overrides the list form and vice versa.
    for (single, list) in [("lwpp.k", "lwpp.k_values"), ("circuit.depth", "circuit.depths")] {
        if overlay.contains_key(single) {
            base.remove(list);
        }
        if overlay.contains_key(list) {
            base.remove(single);
        }
    }
    base.extend(overlay);
    base
}

struct Reader {
    map: FlatConfig,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| ConfigError::new(key, format!("expected a number, got {v}"))),
        }
    }

    fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.take(key).map(|v| as_usize(key, &v)).transpose()
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    fn usize_list(&mut self, list_key: &str, single_key: &str) -> Result<Option<Vec<usize>>, ConfigError> {
        match (self.take(list_key), self.take(single_key)) {
            (Some(_), Some(_)) => Err(ConfigError::new(single_key, format!("conflicts with `{list_key}`"))),
            (Some(Value::Array(items)), None) => {
                items.iter().map(|v| as_usize(list_key, v)).collect::<Result<Vec<_>, _>>().map(Some)
            }
            (Some(v), None) => Err(ConfigError::new(list_key, format!("expected a list, got {v}"))),
            (None, Some(v)) => Ok(Some(vec![as_usize(single_key, &v)?])),
            (None, None) => Ok(None),
        }
    }

    fn string_opt(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(ConfigError::new(key, format!("expected a string, got {v}"))),
        }
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| ConfigError::new(key, format!("expected a non-negative integer, got {v}")))
}

impl ExperimentConfig {
    /// Builds and validates a config from flat keys. Unknown keys are errors.
    pub fn from_flat(map: FlatConfig) -> Result<Self, ConfigError> {
        if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(ConfigError::new(key, "unknown key"));
        }
        let mut r = Reader { map };
        let scenario = r
            .string_opt("scenario")?
            .ok_or_else(|| ConfigError::new("scenario", "required"))?
            .parse::<Scenario>()
            .map_err(|e| ConfigError::new("scenario", e))?;
        let rows = r.usize_opt("lattice.rows")?.ok_or_else(|| ConfigError::new("lattice.rows", "required"))?;
        let cols = r.usize_opt("lattice.cols")?.ok_or_else(|| ConfigError::new("lattice.cols", "required"))?;
        let depths = r
            .usize_list("circuit.depths", "circuit.depth")?
            .ok_or_else(|| ConfigError::new("circuit.depths", "required"))?;
        let couplings = Couplings {
            jx: r.f64_or("couplings.jx", 1.0)?,
            jy: r.f64_or("couplings.jy", 0.8)?,
            jz: r.f64_or("couplings.jz", 0.5)?,
        };
        let k_values = r.usize_list("lwpp.k_values", "lwpp.k")?.unwrap_or_else(|| vec![3]);
        let coeff_epsilon = r.f64_or("lwpp.coeff_epsilon", pauliprop_core::pauli::DEFAULT_MERGE_EPSILON)?;
        let path_coeff_cutoff = r.f64_or("lwpp.path_coeff_cutoff", 0.0)?;

        let init_params = r.take("init.params");
        let init_mode = match r.string_opt("init.mode")?.as_deref() {
            None => scenario.default_init(),
            Some("random") => InitMode::Random,
            Some("near_identity") => InitMode::NearIdentity,
            Some("explicit") => {
                let Some(Value::Array(items)) = &init_params else {
                    return Err(ConfigError::new("init.params", "required as a list when init.mode is explicit"));
                };
                let params = items
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| ConfigError::new("init.params", format!("not a number: {v}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                InitMode::Explicit(params)
            }
            Some(other) => {
                return Err(ConfigError::new(
                    "init.mode",
                    format!("expected random, near_identity or explicit, got {other:?}"),
                ))
            }
        };
        if init_params.is_some() && !matches!(init_mode, InitMode::Explicit(_)) {
            return Err(ConfigError::new("init.params", "only allowed with init.mode = explicit"));
        }

        let runs_per_setting = r.usize_or("runs_per_setting", 24)?;
        let master_seed = match r.take("master_seed") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| ConfigError::new("master_seed", format!("expected a u64, got {v}")))?,
        };
        let adam = AdamConfig::default();
        let learning_rate = r.f64_or("adam.learning_rate", adam.learning_rate)?;
        let beta1 = r.f64_or("adam.beta1", adam.beta1)?;
        let beta2 = r.f64_or("adam.beta2", adam.beta2)?;
        let epsilon = r.f64_or("adam.eps", adam.epsilon)?;
        let pre_grad_tol = r.f64_or("budget.pre_grad_tol", 1e-4)?;
        let budget = Budget {
            pre_iterations: r.usize_or("budget.pre_iterations", 1000)?,
            main_iterations: r.usize_or("budget.main_iterations", 1500)?,
            pre_grad_tol: (pre_grad_tol > 0.0).then_some(pre_grad_tol),
            exact_log_every: r.usize_or("budget.exact_log_every", 10)?,
        };
        let strategy = r
            .string_opt("strategy")?
            .map(|s| s.parse::<Strategy>().map_err(|e| ConfigError::new("strategy", e)))
            .transpose()?;
        let output_dir = PathBuf::from(r.string_opt("output_dir")?.unwrap_or_else(|| "results".to_string()));
        let record_wall_time = match r.take("output.record_wall_time") {
            None => false,
            Some(Value::Bool(b)) => b,
            Some(v) => return Err(ConfigError::new("output.record_wall_time", format!("expected a boolean, got {v}"))),
        };

        let cfg = Self {
            scenario,
            rows,
            cols,
            depths,
            couplings,
            k_values,
            coeff_epsilon,
            path_coeff_cutoff,
            init_mode,
            runs_per_setting,
            master_seed,
            learning_rate,
            beta1,
            beta2,
            epsilon,
            budget,
            strategy,
            output_dir,
            record_wall_time,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Self::from_flat(parse_flat(text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.rows * self.cols;
        if self.rows == 0 {
            return Err(ConfigError::new("lattice.rows", "must be at least 1"));
        }
        if self.cols == 0 {
            return Err(ConfigError::new("lattice.cols", "must be at least 1"));
        }
        if n < 2 {
            return Err(ConfigError::new("lattice.cols", "the lattice needs at least two sites"));
        }
        if n > pauliprop_core::exact::MAX_STATE_QUBITS {
            return Err(ConfigError::new(
                "lattice.rows",
                format!("{n} sites exceed the statevector limit of {}", pauliprop_core::exact::MAX_STATE_QUBITS),
            ));
        }
        if self.depths.is_empty() {
            return Err(ConfigError::new("circuit.depths", "must not be empty"));
        }
        if self.depths.contains(&0) {
            return Err(ConfigError::new("circuit.depths", "depths must be at least 1"));
        }
        if (1..self.depths.len()).any(|i| self.depths[..i].contains(&self.depths[i])) {
            return Err(ConfigError::new("circuit.depths", "depths must be distinct"));
        }
        if self.k_values.is_empty() {
            return Err(ConfigError::new("lwpp.k_values", "must not be empty"));
        }
        if self.k_values.contains(&0) {
            return Err(ConfigError::new("lwpp.k_values", "weights must be at least 1"));
        }
        for (key, v) in [
            ("couplings.jx", self.couplings.jx),
            ("couplings.jy", self.couplings.jy),
            ("couplings.jz", self.couplings.jz),
        ] {
            if !v.is_finite() {
                return Err(ConfigError::new(key, "must be finite"));
            }
        }
        if self.couplings.jx == 0.0 && self.couplings.jy == 0.0 && self.couplings.jz == 0.0 {
            return Err(ConfigError::new("couplings.jx", "at least one coupling must be nonzero"));
        }
        if !(0.0..).contains(&self.coeff_epsilon) {
            return Err(ConfigError::new("lwpp.coeff_epsilon", "must be non-negative"));
        }
        if !(0.0..).contains(&self.path_coeff_cutoff) {
            return Err(ConfigError::new("lwpp.path_coeff_cutoff", "must be non-negative"));
        }
        if self.runs_per_setting == 0 {
            return Err(ConfigError::new("runs_per_setting", "must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ConfigError::new("adam.learning_rate", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return Err(ConfigError::new("adam.beta1", "must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return Err(ConfigError::new("adam.beta2", "must lie in [0, 1)"));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(ConfigError::new("adam.eps", "must be positive"));
        }
        if self.budget.main_iterations == 0 && self.scenario != Scenario::LwppOptExactEval {
            return Err(ConfigError::new("budget.main_iterations", "must be at least 1"));
        }
        if self.budget.pre_iterations == 0
            && matches!(self.scenario, Scenario::LwppOptExactEval | Scenario::ResamplingControl)
        {
            return Err(ConfigError::new("budget.pre_iterations", "must be at least 1 for this scenario"));
        }
        if self.budget.exact_log_every == 0 {
            return Err(ConfigError::new("budget.exact_log_every", "must be at least 1"));
        }
        if let InitMode::Explicit(params) = &self.init_mode {
            if self.depths.len() != 1 {
                return Err(ConfigError::new("init.params", "explicit parameters need exactly one depth"));
            }
            let expected = self.param_count(self.depths[0]);
            if params.len() != expected {
                return Err(ConfigError::new(
                    "init.params",
                    format!("expected {expected} values for depth {}, got {}", self.depths[0], params.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.rows * self.cols
    }

    fn param_count(&self, depth: usize) -> usize {
        let bonds = self.rows * (self.cols - 1) + self.cols * (self.rows - 1);
        3 * bonds * depth
    }

    pub fn main_adam(&self) -> AdamConfig {
        self.adam(self.budget.main_iterations, None)
    }

    pub fn pre_adam(&self) -> AdamConfig {
        self.adam(self.budget.pre_iterations, self.budget.pre_grad_tol)
    }

    fn adam(&self, iterations: usize, stop_grad_norm: Option<f64>) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            iterations,
            stop_grad_norm,
        }
    }

    pub fn truncation(&self, k: usize) -> TruncationConfig {
        TruncationConfig { k, coeff_epsilon: self.coeff_epsilon, path_coeff_cutoff: self.path_coeff_cutoff }
    }

    /// Fully resolved flat form, as stored in the manifest.
    pub fn to_flat(&self) -> FlatConfig {
        let mut m = FlatConfig::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        put("scenario", json!(self.scenario.as_str()));
        put("lattice.rows", json!(self.rows));
        put("lattice.cols", json!(self.cols));
        put("circuit.depths", json!(self.depths));
        put("couplings.jx", json!(self.couplings.jx));
        put("couplings.jy", json!(self.couplings.jy));
        put("couplings.jz", json!(self.couplings.jz));
        put("lwpp.k_values", json!(self.k_values));
        put("lwpp.coeff_epsilon", json!(self.coeff_epsilon));
        put("lwpp.path_coeff_cutoff", json!(self.path_coeff_cutoff));
        match &self.init_mode {
            InitMode::Random => put("init.mode", json!("random")),
            InitMode::NearIdentity => put("init.mode", json!("near_identity")),
            InitMode::Explicit(p) => {
                put("init.mode", json!("explicit"));
                put("init.params", json!(p));
            }
        }
        put("runs_per_setting", json!(self.runs_per_setting));
        put("master_seed", json!(self.master_seed));
        put("adam.learning_rate", json!(self.learning_rate));
        put("adam.beta1", json!(self.beta1));
        put("adam.beta2", json!(self.beta2));
        put("adam.eps", json!(self.epsilon));
        put("budget.pre_iterations", json!(self.budget.pre_iterations));
        put("budget.main_iterations", json!(self.budget.main_iterations));
        put("budget.pre_grad_tol", json!(self.budget.pre_grad_tol.unwrap_or(0.0)));
        put("budget.exact_log_every", json!(self.budget.exact_log_every));
        if let Some(s) = self.strategy {
            put("strategy", json!(s.as_str()));
        }
        put("output_dir", json!(self.output_dir.to_string_lossy()));
        put("output.record_wall_time", json!(self.record_wall_time));
        m
    }
}

/// Replaces `master_seed` with the value of [`SEED_ENV`] when it is set.
pub fn apply_seed_override(map: &mut FlatConfig, env_value: Option<&str>) -> Result<(), ConfigError> {
    if let Some(raw) = env_value {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| ConfigError::new("master_seed", format!("{SEED_ENV}={raw:?} is not a u64")))?;
        map.insert("master_seed".into(), json!(seed));
    }
    Ok(())
}

pub const PRESETS: [&str; 9] = ["fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5", "s2", "s3", "s4"];

/// Base keys for a named experiment. A config file layered on top may
/// override any of them.
pub fn preset(name: &str) -> Option<FlatConfig> {
    let value = match name {
        "fig1a" => json!({
            "scenario": "eval_on_exact_path",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [4]},
            "lwpp": {"k_values": [1, 2, 3, 4]}, "init": {"mode": "random"},
            "runs_per_setting": 1,
        }),
        "fig1b" => json!({
            "scenario": "lwpp_opt_exact_eval",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [4]},
            "lwpp": {"k_values": [1, 2, 3, 4]}, "init": {"mode": "near_identity"},
            "runs_per_setting": 1,
        }),
        "fig2" => json!({
            "scenario": "random_init_compare",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [6]},
            "lwpp": {"k_values": [3]}, "runs_per_setting": 12,
        }),
        "fig3" => json!({
            "scenario": "random_init_compare",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [2, 4, 6, 8]},
            "lwpp": {"k_values": [2, 3]}, "runs_per_setting": 24,
        }),
        "fig4" => json!({
            "scenario": "near_identity_compare",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [6]},
            "lwpp": {"k_values": [3]}, "runs_per_setting": 12,
        }),
        "fig5" => json!({
            "scenario": "near_identity_compare",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [2, 4, 6, 8]},
            "lwpp": {"k_values": [3]}, "runs_per_setting": 24,
        }),
        "s2" => json!({
            "scenario": "near_identity_compare",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [2, 4, 6, 8]},
            "couplings": {"jx": -1.0, "jy": -0.8, "jz": -0.5},
            "lwpp": {"k_values": [3]}, "runs_per_setting": 24,
        }),
        "s3" => json!({
            "scenario": "resampling_control",
            "lattice": {"rows": 3, "cols": 4}, "circuit": {"depths": [6]},
            "lwpp": {"k_values": [3]}, "runs_per_setting": 12,
        }),
        "s4" => json!({
            "scenario": "rugged_landscape",
            "lattice": {"rows": 3, "cols": 3}, "circuit": {"depths": [4]},
            "lwpp": {"k_values": [3]}, "runs_per_setting": 8,
        }),
        _ => return None,
    };
    Some(flatten(&value).expect("presets are objects"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FlatConfig {
        preset("fig4").unwrap()
    }

    #[test]
    fn nested_and_dotted_forms_agree() {
        let a = ExperimentConfig::from_json(r#"{"scenario":"s","lattice":{"rows":2}}"#);
        assert!(a.is_err());
        let nested = parse_flat(
            r#"{"lattice": {"rows": 2, "cols": 3}, "scenario": "near_identity_compare", "circuit": {"depth": 2}}"#,
        )
        .unwrap();
        let dotted = parse_flat(
            r#"{"lattice.rows": 2, "lattice.cols": 3, "scenario": "near_identity_compare", "circuit.depth": 2}"#,
        )
        .unwrap();
        assert_eq!(nested, dotted);
        let cfg = ExperimentConfig::from_flat(nested).unwrap();
        assert_eq!(cfg.depths, vec![2]);
        assert_eq!(cfg.k_values, vec![3]);
        assert_eq!(cfg.runs_per_setting, 24);
        assert_eq!(cfg.init_mode, InitMode::NearIdentity);
        assert_eq!(cfg.budget.pre_grad_tol, Some(1e-4));
    }

    #[test]
    fn errors_name_the_key() {
        let cases: Vec<(FlatConfig, &str)> = vec![
            (merge(base(), parse_flat(r#"{"runs_per_setting": 0}"#).unwrap()), "runs_per_setting"),
            (merge(base(), parse_flat(r#"{"circuit.depths": []}"#).unwrap()), "circuit.depths"),
            (merge(base(), parse_flat(r#"{"circuit.depths": [2, 2]}"#).unwrap()), "circuit.depths"),
            (merge(base(), parse_flat(r#"{"lwpp.k_values": []}"#).unwrap()), "lwpp.k_values"),
            (merge(base(), parse_flat(r#"{"adam.learning_rate": 0}"#).unwrap()), "adam.learning_rate"),
            (merge(base(), parse_flat(r#"{"adam.beta2": 1.0}"#).unwrap()), "adam.beta2"),
            (merge(base(), parse_flat(r#"{"scenario": "nope"}"#).unwrap()), "scenario"),
            (merge(base(), parse_flat(r#"{"lattice.typo": 1}"#).unwrap()), "lattice.typo"),
            (merge(base(), parse_flat(r#"{"init.mode": "explicit"}"#).unwrap()), "init.params"),
            (merge(base(), parse_flat(r#"{"lattice.rows": 9}"#).unwrap()), "lattice.rows"),
            (merge(base(), parse_flat(r#"{"lattice.cols": "4"}"#).unwrap()), "lattice.cols"),
        ];
        for (map, key) in cases {
            let err = ExperimentConfig::from_flat(map).unwrap_err();
            assert_eq!(err.key, key, "{err}");
        }
        let mut missing = base();
        missing.remove("scenario");
        assert_eq!(ExperimentConfig::from_flat(missing).unwrap_err().key, "scenario");
    }

    #[test]
    fn explicit_params_are_checked_against_the_circuit() {
        let ok = merge(
            parse_flat(
                r#"{"scenario":"near_identity_compare","lattice.rows":1,"lattice.cols":2,"circuit.depths":[1]}"#,
            )
            .unwrap(),
            parse_flat(r#"{"init.mode":"explicit","init.params":[0.1,0.2,0.3]}"#).unwrap(),
        );
        let cfg = ExperimentConfig::from_flat(ok.clone()).unwrap();
        assert_eq!(cfg.init_mode, InitMode::Explicit(vec![0.1, 0.2, 0.3]));
        let bad = merge(ok, parse_flat(r#"{"init.params":[0.1]}"#).unwrap());
        assert_eq!(ExperimentConfig::from_flat(bad).unwrap_err().key, "init.params");
    }

    #[test]
    fn overlay_single_forms_replace_lists() {
        let cfg =
            ExperimentConfig::from_flat(merge(base(), parse_flat(r#"{"lwpp.k": 2, "circuit.depth": 4}"#).unwrap()))
                .unwrap();
        assert_eq!(cfg.k_values, vec![2]);
        assert_eq!(cfg.depths, vec![4]);
    }

    #[test]
    fn resolved_config_round_trips() {
        for name in PRESETS {
            let cfg = ExperimentConfig::from_flat(preset(name).unwrap()).unwrap();
            assert_eq!(ExperimentConfig::from_flat(cfg.to_flat()).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn seed_override() {
        let mut m = base();
        apply_seed_override(&mut m, Some("42")).unwrap();
        assert_eq!(ExperimentConfig::from_flat(m.clone()).unwrap().master_seed, 42);
        assert_eq!(apply_seed_override(&mut m, Some("x")).unwrap_err().key, "master_seed");
        apply_seed_override(&mut m, None).unwrap();
        assert_eq!(m["master_seed"], json!(42));
    }

    #[test]
    fn ferromagnetic_preset() {
        let cfg = ExperimentConfig::from_flat(preset("s2").unwrap()).unwrap();
        assert_eq!(cfg.couplings, Couplings { jx: -1.0, jy: -0.8, jz: -0.5 });
    }
}
