use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use powerga::stats::{generate_mlr_sample, ols_fit, regularized_incomplete_beta};
use powerga::{
    estimate_power, Chromosome, KnnPredictor, Metric, OracleConfig, ParameterRange, PowerDictionary, RegressorScheme,
    SearchSpace, TestSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_power");
    group.sample_size(20);
    for n in [50.0, 200.0, 500.0] {
        let space = SearchSpace::new(
            vec![ParameterRange::fixed(0.2), ParameterRange::fixed(0.5), ParameterRange::fixed(0.25)],
            ParameterRange::fixed(n),
        )
        .unwrap();
        let cfg = OracleConfig {
            nsim: 200,
            alpha: 0.05,
            sigma2: 1.0,
            test: TestSpec::t_single(3),
            scheme: RegressorScheme::Experiment,
        };
        let chromosome = Chromosome::new(vec![0; 4]);
        group.bench_with_input(BenchmarkId::new("nsim200", n), &n, |b, _| {
            b.iter(|| estimate_power(black_box(&chromosome), &space, &cfg, 1).unwrap())
        });
    }
    group.finish();
}

fn ols(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, y) = generate_mlr_sample(&[0.2, 0.5, 0.25], 200, 1.0, RegressorScheme::Experiment, &mut rng).unwrap();
    c.bench_function("ols_fit n=200 k=4", |b| b.iter(|| ols_fit(black_box(&x), black_box(&y)).unwrap()));
}

fn incomplete_beta(c: &mut Criterion) {
    c.bench_function("regularized_incomplete_beta", |b| {
        b.iter(|| regularized_incomplete_beta(black_box(98.0 / 2.0), black_box(0.5), black_box(0.93)).unwrap())
    });
}

fn knn(c: &mut Criterion) {
    let space = SearchSpace::new(
        vec![
            ParameterRange::new(0.10, 0.30, 0.05).unwrap(),
            ParameterRange::new(0.30, 0.90, 0.05).unwrap(),
            ParameterRange::new(0.05, 0.50, 0.05).unwrap(),
        ],
        ParameterRange::new(50.0, 500.0, 5.0).unwrap(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut dict = PowerDictionary::new();
    while dict.len() < 5000 {
        dict.insert(space.random_chromosome(&mut rng), rng.random());
    }
    let predictor = KnnPredictor::new(&dict, &space, Metric::NormalizedEuclidean).unwrap();
    let query = [0.17, 0.61, 0.22, 312.0];
    c.bench_function("knn predict k=5 over 5000 entries", |b| {
        b.iter(|| predictor.predict(black_box(&query), 5).unwrap())
    });
}

criterion_group!(benches, oracle, ols, incomplete_beta, knn);
criterion_main!(benches);
