use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use pauliprop::config::{self, FlatConfig, PRESETS, SEED_ENV};
use pauliprop::experiment::{cached_ground_states, emit_records, evaluate, execute, execute_single, ground_state};
use pauliprop::{ConfigError, ExperimentConfig, HarnessError, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pauliprop", version, about = "LWPP-initialized VQE experiments on 2D XYZ lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and LWPP energy and gradient at one parameter draw (JSON on stdout).
    Eval(Common),
    /// One optimization run of the configured `strategy`.
    Optimize(Common),
    /// Every run of the configured scenario.
    Experiment(Common),
    /// Exact ground-state energy of the configured Hamiltonian.
    Gs(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config with flat dotted or nested keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replaces `output_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Named base config; keys from --config override it.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut map = FlatConfig::new();
        if let Some(name) = &self.preset {
            map = config::preset(name).ok_or_else(|| ConfigError::new("preset", format!("unknown preset {name:?}")))?;
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            let file = config::parse_flat(&text)
                .map_err(|e| ConfigError::new(e.key, format!("{}: {}", path.display(), e.message)))?;
            map = config::merge(map, file);
        } else if self.preset.is_none() {
            return Err(ConfigError::new("<cli>", "give --config, --preset or both").into());
        }
        if let Some(dir) = &self.out_dir {
            map.insert("output_dir".into(), json!(dir.to_string_lossy()));
        }
        config::apply_seed_override(&mut map, std::env::var(SEED_ENV).ok().as_deref())?;
        Ok(ExperimentConfig::from_flat(map)?)
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Other(e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HarnessError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Eval(c) => {
            print_json(&evaluate(&c.load()?)?)?;
            Ok(true)
        }
        Command::Gs(c) => {
            let cfg = c.load()?;
            print_json(&ground_state(&cfg, &cached_ground_states(&cfg.output_dir))?)?;
            Ok(true)
        }
        Command::Optimize(c) => {
            let cfg = c.load()?;
            let out = execute_single(&cfg, &cached_ground_states(&cfg.output_dir))?;
            if c.out_dir.is_some() {
                emit_records(&cfg.output_dir, &out)?;
            }
            print_json(&out.runs)?;
            Ok(out.failures() == 0)
        }
        Command::Experiment(c) => {
            let cfg = c.load()?;
            let out = execute(&cfg, c.threads, &cached_ground_states(&cfg.output_dir))?;
            let manifest = emit_records(&cfg.output_dir, &out)?;
            for a in &manifest.artifacts {
                info!("{}: {} rows, sha256 {}", cfg.output_dir.join(&a.path).display(), a.rows, a.sha256);
            }
            print_json(&out.summary)?;
            if out.failures() > 0 {
                error!("{} runs failed; see runs.csv", out.failures());
            }
            Ok(out.failures() == 0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
