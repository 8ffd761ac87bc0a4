use bnctl::fixtures;
use bnctl::mincontrol::minimum_control;
use bnctl::pbn::{build_tpm, check_sp, DEFAULT_TPM_CAP};
use bnctl::pinning::{design_pinning, PinningOptions};
use bnctl::structural::{check_structural_controllability, check_structural_controllability_dense};
use bnctl_bench::{forest, pbn};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn structural_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("structural_check");
    for n in [1_000, 10_000, 100_000] {
        let g = forest(n);
        group.bench_with_input(BenchmarkId::new("linear", n), &g, |b, g| {
            b.iter(|| check_structural_controllability(black_box(g)))
        });
    }
    // the quadratic cross-check, for the growth comparison
    for n in [250, 1_000, 2_000] {
        let g = forest(n);
        group.bench_with_input(BenchmarkId::new("dense", n), &g, |b, g| {
            b.iter(|| check_structural_controllability_dense(black_box(g)))
        });
    }
    group.finish();
}

fn tcell(c: &mut Criterion) {
    let net = fixtures::tcell();
    c.bench_function("tcell_mincontrol", |b| b.iter(|| minimum_control(black_box(&net)).unwrap()));
    c.bench_function("tcell_pinning", |b| b.iter(|| design_pinning(black_box(&net), &PinningOptions::default()).unwrap()));
}

fn chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("pbn");
    for n in [6, 10] {
        let p = pbn(n, 3);
        group.bench_with_input(BenchmarkId::new("tpm_and_check", n), &p, |b, p| {
            b.iter(|| {
                let tm = build_tpm(p, DEFAULT_TPM_CAP).unwrap();
                check_sp(&tm, 0, 0)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, structural_check, tcell, chains);
criterion_main!(benches);
