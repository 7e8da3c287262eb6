use std::collections::HashMap;
use std::sync::Mutex;

use powerga::ga::{run_with_oracle, GaConfig};
use powerga::{Chromosome, ParameterRange, Result, SearchSpace};

fn space() -> SearchSpace {
    SearchSpace::new(
        vec![
            ParameterRange::new(0.0, 1.0, 0.05).unwrap(),
            ParameterRange::new(0.0, 1.0, 0.05).unwrap(),
        ],
        ParameterRange::new(10.0, 200.0, 5.0).unwrap(),
    )
    .unwrap()
}

/// Smooth synthetic manifold in [0, 1], increasing in every gene.
fn synthetic(c: &Chromosome) -> f64 {
    let g = c.genes();
    let s = f64::from(g[0]) / 20.0 + f64::from(g[1]) / 20.0 + f64::from(g[2]) / 38.0;
    s / 3.0
}

/// Counts how often each chromosome reaches the oracle.
#[derive(Default)]
struct CountingOracle {
    calls: Mutex<HashMap<Chromosome, u32>>,
}

impl powerga::PowerOracle for CountingOracle {
    fn power(&self, c: &Chromosome) -> Result<f64> {
        *self.calls.lock().unwrap().entry(c.clone()).or_default() += 1;
        Ok(synthetic(c))
    }
}

fn cfg(n: usize, i: usize, lambda: f64, seed: u64) -> GaConfig {
    GaConfig {
        population_size: n,
        iterations: i,
        lambda,
        mutation_prob: 0.05,
        master_seed: seed,
    }
}

#[test]
fn every_chromosome_reaches_the_oracle_once() {
    for seed in 0..10 {
        let oracle = CountingOracle::default();
        let c = cfg(30, 25, 4.0, seed);
        let report = run_with_oracle(&space(), &oracle, &c, 3).unwrap();
        let calls = oracle.calls.into_inner().unwrap();
        assert!(calls.values().all(|&v| v == 1));
        assert_eq!(calls.len(), report.dictionary.len());
        assert_eq!(report.oracle_queries, report.dictionary.len() as u64);
        assert!(report.dictionary.len() <= 30 * 26);
        for (k, v) in report.dictionary.iter() {
            assert_eq!(v, synthetic(k));
        }
    }
}

#[test]
fn telemetry_has_one_row_per_evaluation_round() {
    let oracle = |c: &Chromosome| Ok(synthetic(c));
    let report = run_with_oracle(&space(), &oracle, &cfg(12, 9, 1.0, 3), 1).unwrap();
    assert_eq!(report.per_iteration.len(), 10);
    let mut total = 0;
    for (i, row) in report.per_iteration.iter().enumerate() {
        assert_eq!(row.iteration, i);
        total += row.new_queries;
        assert_eq!(row.dictionary_size as u64, total);
        assert!(row.mean_fitness <= row.best_fitness);
    }
    assert_eq!(total, report.oracle_queries);
}

#[test]
fn longer_run_extends_shorter_run_with_same_seed() {
    let oracle = |c: &Chromosome| Ok(synthetic(c));
    let short = run_with_oracle(&space(), &oracle, &cfg(20, 5, 2.0, 8), 2).unwrap();
    let long = run_with_oracle(&space(), &oracle, &cfg(20, 12, 2.0, 8), 2).unwrap();
    assert_eq!(short.per_iteration[..], long.per_iteration[..6]);
    assert!(short.dictionary.iter().all(|(k, _)| long.dictionary.contains(k)));
}

#[test]
fn result_does_not_depend_on_worker_count() {
    let oracle = |c: &Chromosome| Ok(synthetic(c));
    let a = run_with_oracle(&space(), &oracle, &cfg(25, 15, 3.0, 21), 1).unwrap();
    for workers in [2, 4, 7] {
        let b = run_with_oracle(&space(), &oracle, &cfg(25, 15, 3.0, 21), workers).unwrap();
        assert_eq!(a.dictionary, b.dictionary);
        assert_eq!(a.per_iteration, b.per_iteration);
    }
}

#[test]
fn selection_pressure_raises_mean_learned_fitness() {
    // Sign test over 20 seeds; under no effect 15 or more wins has probability < 0.021.
    let oracle = |c: &Chromosome| Ok(synthetic(c));
    let wins = (0..20)
        .filter(|&seed| {
            let strong = run_with_oracle(&space(), &oracle, &cfg(30, 30, 10.0, seed), 1).unwrap();
            let flat = run_with_oracle(&space(), &oracle, &cfg(30, 30, 0.0, seed), 1).unwrap();
            strong.dictionary.mean_power() > flat.dictionary.mean_power()
        })
        .count();
    assert!(wins >= 15, "only {wins}/20 seeds");
}

#[test]
fn oracle_errors_carry_the_chromosome() {
    let oracle = |c: &Chromosome| {
        if c.genes()[0] > 15 {
            Err(powerga::Error::DegenerateFit("synthetic".into()))
        } else {
            Ok(0.5)
        }
    };
    let err = run_with_oracle(&space(), &oracle, &cfg(50, 5, 1.0, 0), 2).unwrap_err();
    match err {
        powerga::Error::Oracle { chromosome, .. } => assert!(chromosome[0] > 15),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn out_of_range_power_is_rejected() {
    let oracle = |_: &Chromosome| Ok(1.5);
    assert!(run_with_oracle(&space(), &oracle, &cfg(4, 1, 1.0, 0), 1).is_err());
}

#[test]
fn invalid_ga_configs_name_their_field() {
    let oracle = |c: &Chromosome| Ok(synthetic(c));
    let cases = [
        (cfg(1, 5, 1.0, 0), "ga.population_size"),
        (cfg(5, 0, 1.0, 0), "ga.iterations"),
        (cfg(5, 5, f64::NAN, 0), "ga.lambda"),
        (
            GaConfig {
                mutation_prob: 1.5,
                ..cfg(5, 5, 1.0, 0)
            },
            "ga.mutation_prob",
        ),
    ];
    for (c, field) in cases {
        let err = run_with_oracle(&space(), &oracle, &c, 1).unwrap_err();
        assert!(err.to_string().contains(field), "{err}");
    }
    let err = run_with_oracle(&space(), &oracle, &cfg(5, 5, 1.0, 0), 0).unwrap_err();
    assert!(err.to_string().contains("workers"));
}
