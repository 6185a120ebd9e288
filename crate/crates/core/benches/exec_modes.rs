use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wconorm::exec::Exec;
use wconorm::norms::{norm_p, realize, EstimateOptions, Exponent};
use wconorm::scenario::{random_scenario, RandomSpec, Scenario};
use wconorm::verify::{run_batch, CheckName};
use wconorm::GroupDescriptor;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn scenarios(count: usize, group: GroupDescriptor, points: usize, dim: usize) -> Vec<Scenario> {
    (0..count as u64)
        .map(|seed| {
            random_scenario(&RandomSpec {
                group: group.clone(),
                points,
                dim,
                support: 3,
                seed,
                free: true,
            })
            .unwrap()
        })
        .collect()
}

fn bench_batch(c: &mut Criterion) {
    let batch = scenarios(32, GroupDescriptor::Cyclic(4), 12, 1);
    let ps = [Exponent::ONE, Exponent::TWO, Exponent::INFINITY];
    let mut group = c.benchmark_group("batch_verify");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = EstimateOptions { exec, ..EstimateOptions::with_seed(1) };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| run_batch(black_box(&batch), &CheckName::ALL, &ps, opts).unwrap())
        });
    }
    group.finish();
}

fn bench_power_ascent(c: &mut Criterion) {
    let sc = &scenarios(1, GroupDescriptor::Cyclic(5), 20, 2)[0];
    let b = sc.instantiate().unwrap().element;
    let r = realize(&b, Exponent::new(3.0).unwrap());
    let mut group = c.benchmark_group("power_ascent_p3");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = EstimateOptions { exec, ..EstimateOptions::with_seed(1) };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |bch, opts| {
            bch.iter(|| norm_p(black_box(&r), opts))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_batch, bench_power_ascent);
criterion_main!(benches);
