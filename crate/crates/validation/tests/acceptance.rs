//! Acceptance criteria, one line each.
//!
//! Runs as a plain binary so every verdict is printed. Exits non-zero when any
//! criterion fails. The full-scale initialization-advantage experiment (3x4,
//! d=6, 12 seeds) adds about six minutes on one core and only runs when
//! `PAULIPROP_FULL_SCALE=1` is set; its CI-scale variant always runs.

use std::process::ExitCode;
use std::time::Instant;

use pauliprop::config::{self, FlatConfig};
use pauliprop::experiment::execute;
use pauliprop::{ExperimentConfig, ExperimentOutput, Strategy};
use pauliprop_core::dense::dense_ground_state_energy;
use pauliprop_core::rng::{derive_seed, seeded_rng, uniform_angles};
use pauliprop_core::spectrum::{lanczos_ground_state, LanczosConfig};
use pauliprop_core::*;
use pauliprop_validation::{Report, Verdict};
use rand::Rng;
use serde_json::json;

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict::new(pass, detail)
}

fn config(preset: &str, overrides: serde_json::Value) -> ExperimentConfig {
    let base = config::preset(preset).expect("preset");
    let overlay: FlatConfig = config::flatten(&overrides).expect("overrides");
    ExperimentConfig::from_flat(config::merge(base, overlay)).expect("config")
}

fn run(cfg: &ExperimentConfig) -> ExperimentOutput {
    let out = execute(cfg, 0, &[]).expect("experiment");
    assert_eq!(
        out.failures(),
        0,
        "runs failed: {:?}",
        out.runs.iter().filter_map(|r| r.error.as_ref()).collect::<Vec<_>>()
    );
    out
}

fn model(rows: usize, cols: usize, depth: usize) -> (Circuit, PauliSum, InitStateSpec) {
    let lat = Lattice::new(rows, cols).unwrap();
    (build_ansatz(&lat, depth).unwrap(), build_hamiltonian(&lat, 1.0, 0.8, 0.5), build_singlet_pairing(&lat))
}

fn oracle_exactness() -> Verdict {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (rows, cols) in [(2, 2), (2, 3)] {
        for depth in 1..=3 {
            let (circuit, h, init) = model(rows, cols, depth);
            let lwpp = LwppEvaluator::new(&circuit, &h, &init, &TruncationConfig::new(rows * cols)).unwrap();
            let exact = ExactEvaluator::new(&circuit, &h, &init).unwrap();
            for i in 0..100 {
                let p = uniform_angles(&mut seeded_rng(derive_seed(1, depth as u64, i)), circuit.param_count(), 1.0);
                worst = worst.max((lwpp.energy(&p).unwrap() - exact.energy(&p).unwrap()).abs());
                cases += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-9 && secs < 60.0,
        format!("max |E_lwpp(k=n) - E_exact| = {worst:.2e} over {cases} cases in {secs:.1}s (<= 1e-9, < 60s)"),
    )
}

type Engine<'a> = Box<dyn Fn(&[f64]) -> (f64, Vec<f64>) + 'a>;

fn gradient_correctness() -> Verdict {
    let t = Instant::now();
    let (circuit, h, init) = model(2, 3, 2);
    let exact = ExactEvaluator::new(&circuit, &h, &init).unwrap();
    let step = 1e-5;
    let mut bad = Vec::new();
    let mut checked = 0;
    for config in 0..20u64 {
        let p = uniform_angles(&mut seeded_rng(derive_seed(2, 0, config)), circuit.param_count(), 1.0);
        let k = 1 + config as usize % 6;
        let lwpp = LwppEvaluator::new(&circuit, &h, &init, &TruncationConfig::new(k)).unwrap();
        let engines: [(&str, Engine); 2] = [
            ("lwpp", Box::new(|q: &[f64]| lwpp.energy_and_gradient(q).unwrap())),
            ("exact", Box::new(|q: &[f64]| exact.energy_and_gradient(q).unwrap())),
        ];
        for (name, f) in &engines {
            let (_, g) = f(&p);
            for (i, gi) in g.iter().enumerate() {
                let mut q = p.clone();
                q[i] = p[i] + step;
                let up = f(&q).0;
                q[i] = p[i] - step;
                let fd = (up - f(&q).0) / (2.0 * step);
                let diff = (gi - fd).abs();
                checked += 1;
                if diff > 1e-7 && diff > 1e-4 * fd.abs() {
                    bad.push(format!("{name} k={k} config {config} param {i}"));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        bad.is_empty() && secs < 120.0,
        format!(
            "{} of {checked} partials outside rel 1e-4 / abs 1e-7 of central differences in {secs:.1}s {:?}",
            bad.len(),
            bad.first()
        ),
    )
}

fn ground_state_oracle() -> Verdict {
    let pair = Lattice::new(1, 2).unwrap();
    let e1 = ground_state_energy(&build_hamiltonian(&pair, 1.0, 0.8, 0.5)).unwrap();
    let e2 = ground_state_energy(&build_hamiltonian(&pair, 1.0, 1.0, 1.0)).unwrap();
    let mut rng = seeded_rng(3);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (rows, cols) in [(1, 3), (2, 2), (2, 3), (1, 7), (2, 4), (3, 3), (2, 5)] {
        let lat = Lattice::new(rows, cols).unwrap();
        for j in [
            (1.0, 0.8, 0.5),
            (-1.0, -0.8, -0.5),
            (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)),
        ] {
            let h = build_hamiltonian(&lat, j.0, j.1, j.2);
            let dense = dense_ground_state_energy(&h).unwrap();
            worst = worst.max((lanczos_ground_state(&h, &LanczosConfig::default()).unwrap() - dense).abs());
            count += 1;
        }
    }
    let pass = (e1 + 2.3).abs() <= 1e-8 && (e2 + 3.0).abs() <= 1e-8 && worst <= 1e-8;
    verdict(pass, format!("1x2: {e1:.12} (-2.3), {e2:.12} (-3.0); max |lanczos - dense| = {worst:.2e} over {count} Hamiltonians up to 10 qubits"))
}

fn estimator_collapse() -> Verdict {
    let cfg = config("fig1a", json!({"lwpp.k_values": [3]}));
    let out = run(&cfg);
    let direct: Vec<_> = out.run_rows("d4-r000", "direct", None).collect();
    let last = direct.last().unwrap();
    let e_final = last.exact_energy.unwrap();
    let from = last.iteration - last.iteration / 3;
    let tail: Vec<f64> = out
        .run_rows("d4-r000", "lwpp_eval", Some(3))
        .filter(|r| r.iteration >= from)
        .map(|r| r.cost_value.abs())
        .collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    verdict(
        !tail.is_empty() && mean < 0.1 * e_final.abs(),
        format!("3x4 d=4 random init: mean |E_lwpp(k=3)| over {} evaluations in iterations {from}..{} = {mean:.4}, 0.1*|E_exact_final| = {:.4}", tail.len(), last.iteration, 0.1 * e_final.abs()),
    )
}

fn navigator() -> Verdict {
    let cfg = config("fig1b", json!({"lwpp.k_values": [3]}));
    let out = run(&cfg);
    let r = &out.runs[0];
    let err = r.final_relative_error.unwrap();
    verdict(err <= 0.2, format!("3x4 d=4 near-identity LWPP(k=3) optimization: exact relative error at endpoint = {err:.4} after {} iterations (<= 0.2)", r.pre_iterations))
}

/// Returns the init-advantage and speedup verdicts of one compare experiment.
fn compare(rows: usize, cols: usize, depth: usize, runs: usize) -> (Verdict, Verdict) {
    let cfg = config(
        "fig4",
        json!({"lattice.rows": rows, "lattice.cols": cols, "circuit.depths": [depth], "runs_per_setting": runs}),
    );
    let out = run(&cfg);
    let direct = out.summary_for(depth, Strategy::Direct, None).unwrap();
    let lwpp = out.summary_for(depth, Strategy::LwppInit, Some(3)).unwrap();
    let (d, l) = (direct.decile_relative_error.unwrap(), lwpp.decile_relative_error.unwrap());
    let its = lwpp.median_iterations_to_target.unwrap();
    let label = format!("{rows}x{cols} d={depth}, {runs} seeds");
    (
        verdict(
            l <= d / 3.0,
            format!("{label}: top-decile error lwpp_init(k=3) {l:.3e} vs direct {d:.3e}, ratio {:.3} (<= 1/3); medians {:.3e} vs {:.3e}", l / d, lwpp.median_relative_error.unwrap(), direct.median_relative_error.unwrap()),
        ),
        verdict(its <= 500.0, format!("{label}: median iterations to the direct run's final error = {its} ({} of {} reached; <= 500)", lwpp.reached_target, lwpp.target_runs)),
    )
}

fn resampling_control() -> Verdict {
    let cfg = config("s3", json!({"runs_per_setting": 8}));
    let out = run(&cfg);
    let lwpp = out.summary_for(6, Strategy::LwppInit, Some(3)).unwrap().median_relative_error.unwrap();
    let resampled = out.summary_for(6, Strategy::Resampled, Some(3)).unwrap().median_relative_error.unwrap();
    verdict(
        resampled >= 5.0 * lwpp,
        format!(
            "3x4 d=6, 8 seeds: median error resampled {resampled:.3e} vs lwpp_init {lwpp:.3e}, ratio {:.1} (>= 5)",
            resampled / lwpp
        ),
    )
}

fn rugged_landscape() -> Verdict {
    let cfg = config("s4", json!({}));
    let out = run(&cfg);
    let depth = cfg.depths[0];
    let direct = out.summary_for(depth, Strategy::Direct, None).unwrap().median_relative_error.unwrap();
    let lwpp = out.summary_for(depth, Strategy::LwppInit, Some(3)).unwrap().median_relative_error.unwrap();
    verdict(
        direct > 0.1 && lwpp < 0.01,
        format!(
            "{}x{} d={depth} rugged, {} seeds: median error direct {direct:.3e} (> 0.1), lwpp_init {lwpp:.3e} (< 0.01)",
            cfg.rows, cfg.cols, cfg.runs_per_setting
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "fig5",
        json!({"lattice.rows": 2, "lattice.cols": 3, "circuit.depths": [2, 3], "runs_per_setting": 3, "budget.main_iterations": 200, "budget.pre_iterations": 100}),
    );
    let mut bodies = Vec::new();
    for (i, threads) in [1, 1, 3].into_iter().enumerate() {
        let out = execute(&cfg, threads, &[]).unwrap();
        let sub = dir.path().join(i.to_string());
        pauliprop::emit_records(&sub, &out).unwrap();
        bodies.push(std::fs::read(sub.join("trajectories.csv")).unwrap());
    }
    let same = bodies.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same,
        format!(
            "3 reruns (1, 1 and 3 threads) of a 2x3 compare experiment: trajectories.csv {} ({} bytes)",
            if same { "byte-identical" } else { "differs" },
            bodies[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let full = std::env::var("PAULIPROP_FULL_SCALE").is_ok_and(|v| v == "1");
    let mut report = Report::default();
    report.record("oracle exactness", oracle_exactness());
    report.record("gradient correctness", gradient_correctness());
    report.record("ground-state oracle", ground_state_oracle());
    report.record("estimator collapse", estimator_collapse());
    report.record("navigator", navigator());
    let (advantage, speedup) = compare(3, 3, 4, 12);
    report.record("initialization advantage (CI scale)", advantage);
    report.record("speedup (CI scale)", speedup);
    if full {
        let (advantage, speedup) = compare(3, 4, 6, 12);
        report.record("initialization advantage (full scale)", advantage);
        report.record("speedup (full scale)", speedup);
    } else {
        report.skip("initialization advantage and speedup (full scale)", "set PAULIPROP_FULL_SCALE=1");
    }
    report.record("resampling control", resampling_control());
    report.record("rugged landscape", rugged_landscape());
    report.record("determinism", determinism());
    report.finish()
}
