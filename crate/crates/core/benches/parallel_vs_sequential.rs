//! Parallel vs sequential timings of the data-parallel kernels.
//!
//! With the default `parallel` feature the same public entry points are timed
//! inside a single-thread rayon pool and the ambient multi-thread pool, which
//! isolates the speedup of the block-parallel inner loops. Built with
//! `--no-default-features` the suite times the plain sequential fallback.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use photonkin::fock::{displacement_matrix, distribution};
use photonkin::stats::{hbt_c2, SourceModel};
use photonkin::C64;

fn bench_kernels(c: &mut Criterion, label: &str) {
    let src = SourceModel::ChaoticGaussian {
        radius: 1.0,
        momentum_scale: 1.0,
    };
    c.bench_function(&format!("hbt_c2_200k/{label}"), |b| {
        b.iter(|| {
            hbt_c2(
                black_box(&src),
                black_box([0.7, 0.0, 0.0]),
                black_box([0.0, 0.0, 0.0]),
                200_000,
                17,
            )
            .unwrap()
        })
    });
    c.bench_function(&format!("displacement_matrix_256/{label}"), |b| {
        b.iter(|| displacement_matrix(black_box(C64::new(5.0, 2.0)), 256).unwrap())
    });
    c.bench_function(&format!("distribution_m1_4096/{label}"), |b| {
        b.iter(|| distribution(black_box(C64::new(7.0, 0.0)), 1, 4096).unwrap())
    });
}

#[cfg(feature = "parallel")]
fn run(c: &mut Criterion) {
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    single.install(|| bench_kernels(c, "seq_1thread"));
    bench_kernels(c, "par_default");
}

#[cfg(not(feature = "parallel"))]
fn run(c: &mut Criterion) {
    bench_kernels(c, "sequential_fallback");
}

criterion_group!(benches, run);
criterion_main!(benches);
