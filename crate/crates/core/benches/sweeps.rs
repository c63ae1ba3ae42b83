use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use polyquot::charsum::character_sum_profile_with;
use polyquot::funcfield::{quotient_table_with, FieldRing};
use polyquot::quotient::batch_quotients_with;
use polyquot::verifier::{run_bound_sweep_with, SweepGrid};
use polyquot::{Exec, PrimeContext};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn batch(c: &mut Criterion) {
    let ctx = PrimeContext::new(1_000_003).unwrap();
    let mut group = c.benchmark_group("batch_quotients");
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, "p=1000003 N=p"), &exec, |b, &exec| {
            b.iter(|| batch_quotients_with(exec, &ctx, black_box(12345), ctx.p()).unwrap())
        });
    }
    group.finish();
}

fn charsum(c: &mut Criterion) {
    let ctx = PrimeContext::new(4099).unwrap();
    let mut group = c.benchmark_group("character_sum_profile");
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, "p=4099 N=p"), &exec, |b, &exec| {
            b.iter(|| character_sum_profile_with(exec, &ctx, black_box(1), ctx.p()).unwrap())
        });
    }
    group.finish();
}

fn funcfield(c: &mut Criterion) {
    let ring = FieldRing::smallest(3, 1, 6).unwrap();
    let mut group = c.benchmark_group("funcfield_table");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, "q=3 n=6"), &exec, |b, &exec| {
            b.iter(|| quotient_table_with(exec, &ring, black_box(1)).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let grid = SweepGrid::default();
    let mut group = c.benchmark_group("bound_sweep_theorem6");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::new(name, "default grid"), &exec, |b, &exec| {
            b.iter(|| run_bound_sweep_with(exec, black_box(6), &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch, charsum, funcfield, sweep);
criterion_main!(benches);
