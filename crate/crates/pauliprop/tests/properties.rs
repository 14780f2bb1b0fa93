use pauliprop::config::{self, PRESETS};
use pauliprop::records::{summarize, to_csv, TRAJECTORY_COLUMNS};
use pauliprop::{resample_parameters, ExperimentConfig, TrajectoryRow};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn resampling_keeps_length_and_support(values in prop::collection::vec(-10.0f64..10.0, 1..80), seed: u64) {
        let out = resample_parameters(&values, seed).unwrap();
        prop_assert_eq!(out.len(), values.len());
        prop_assert!(out.iter().all(|v| values.contains(v)));
        prop_assert_eq!(out, resample_parameters(&values, seed).unwrap());
    }

    #[test]
    fn resampling_a_constant_vector_is_the_identity(v in -5.0f64..5.0, n in 1usize..40, seed: u64) {
        prop_assert_eq!(resample_parameters(&vec![v; n], seed).unwrap(), vec![v; n]);
    }

    #[test]
    fn seed_override_only_changes_the_seed(index in 0usize..PRESETS.len(), seed: u64) {
        let base = config::preset(PRESETS[index]).unwrap();
        let mut map = base.clone();
        config::apply_seed_override(&mut map, Some(&seed.to_string())).unwrap();
        let a = ExperimentConfig::from_flat(base).unwrap();
        let b = ExperimentConfig::from_flat(map).unwrap();
        prop_assert_eq!(b.master_seed, seed);
        prop_assert_eq!(ExperimentConfig { master_seed: a.master_seed, ..b }, a);
    }

    #[test]
    fn trajectory_csv_round_trips(rows in prop::collection::vec(trajectory_row(), 0..12)) {
        let bytes = to_csv(&TRAJECTORY_COLUMNS, &rows).unwrap();
        let mut reader = csv::Reader::from_reader(bytes.as_slice());
        let back: Vec<TrajectoryRow> = reader.deserialize().collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(&back, &rows);
        prop_assert_eq!(summarize(&back, &Default::default()), summarize(&rows, &Default::default()));
    }
}

fn trajectory_row() -> impl Strategy<Value = TrajectoryRow> {
    (
        0usize..3,
        prop::sample::select(vec!["direct", "lwpp_init"]),
        1usize..40,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        prop::option::of(0.0f64..1.0),
        prop::option::of(0.0f64..100.0),
    )
        .prop_map(|(run, strategy, iteration, cost, err, wall)| TrajectoryRow {
            run_id: format!("d2-r{run:03}"),
            seed: run as u64 * 7,
            scenario: "near_identity_compare".into(),
            strategy: strategy.into(),
            lattice_rows: 2,
            lattice_cols: 3,
            depth: 2,
            k: (strategy != "direct").then_some(3),
            stage: if iteration % 2 == 0 { "pre".into() } else { "main".into() },
            iteration,
            cost_value: cost,
            exact_energy: err.map(|e| -1.0 - e),
            relative_error: err,
            grad_norm: Some(cost.abs()),
            wall_ms: wall,
        })
}
