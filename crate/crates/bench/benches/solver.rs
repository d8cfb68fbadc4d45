//! Whole-generation solver cost at a reduced generation count.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sgs_bench::games_of_size;
use sgs_core::evolve::{run, EvolveParams};

fn bench_solver_generations(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver_20_generations");
    group.sample_size(10);
    for n in [10usize, 20] {
        let game = games_of_size(n).remove(1);
        let params = EvolveParams {
            n_pop: 100,
            n_gen: 20,
            n_ref: 10,
            seed: 3,
            ..EvolveParams::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| run(black_box(&game), black_box(&params)).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_solver_generations);
criterion_main!(benches);
