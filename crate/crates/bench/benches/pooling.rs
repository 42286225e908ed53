use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use alpool::scoremap::{pool_forward, wildcat_class_pool, PoolConfig};

fn map_values(cells: usize) -> Vec<f64> {
    // Deterministic, tie-free pseudo-scores.
    (0..cells)
        .map(|i| ((i * 2654435761) % 1000) as f64 / 100.0 - 5.0)
        .collect()
}

fn bench_pooling(c: &mut Criterion) {
    let mut group = c.benchmark_group("pooling");
    let map = map_values(64);
    let weldon = PoolConfig::weldon(8, 8);
    group.bench_function("weldon_forward_8x8", |b| {
        b.iter(|| pool_forward(black_box(&map), black_box(&weldon)).unwrap())
    });

    let (_, trace) = pool_forward(&map, &weldon).unwrap();
    group.bench_function("weldon_backward_8x8", |b| {
        b.iter(|| black_box(&trace).backward(black_box(0.37)))
    });

    let wildcat = PoolConfig::wildcat(8, 8, 4);
    let raw = map_values(64 * 4);
    group.bench_function("wildcat_class_pool_m4", |b| {
        b.iter(|| wildcat_class_pool(black_box(&raw), black_box(4), black_box(64)).unwrap())
    });
    group.finish();
    let _ = wildcat;
}

criterion_group!(benches, bench_pooling);
criterion_main!(benches);
