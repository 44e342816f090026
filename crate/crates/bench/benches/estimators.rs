use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tsce_bench::{problem, toeplitz_system};
use tsce_core::toeplitz::levinson_solve;
use tsce_core::{EstimatorKind, EstimatorPlan};

fn levinson(c: &mut Criterion) {
    let mut group = c.benchmark_group("levinson");
    for n in [128, 256, 512, 1024] {
        let (t, b) = toeplitz_system(n, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| levinson_solve(black_box(&t), black_box(&b)).unwrap())
        });
    }
    group.finish();
}

fn estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    for (side, k) in [(4, 8), (8, 28)] {
        let p = problem(side, k, 14, 2, 3);
        let label = format!("M{}_K{k}", side * side);
        for kind in [EstimatorKind::Tsce, EstimatorKind::Mmse] {
            let plan = EstimatorPlan::new(kind, &p.scenario, p.sigma2).unwrap();
            group.bench_function(BenchmarkId::new(format!("{kind}_apply"), &label), |bench| {
                bench.iter(|| plan.estimate(&p.scenario, black_box(&p.rx)).unwrap())
            });
            group.bench_function(BenchmarkId::new(format!("{kind}_plan_and_apply"), &label), |bench| {
                bench.iter(|| {
                    let plan = EstimatorPlan::new(kind, black_box(&p.scenario), p.sigma2).unwrap();
                    plan.estimate(&p.scenario, &p.rx).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, levinson, estimators);
criterion_main!(benches);
