use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sparsec_bench::{mttkrp, spmspm, spmv, uniform};
use sparsec_core::exec::run_kernel;
use sparsec_core::{Encoding, SparseStorage};

fn pack(c: &mut Criterion) {
    let coo = uniform(vec![1024, 1024], 0.01, 1);
    let mut g = c.benchmark_group("pack");
    for (name, enc) in [
        ("csr", Encoding::csr()),
        ("csc", Encoding::csc()),
        ("dcsr", Encoding::dcsr()),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| SparseStorage::pack(black_box(&coo), &enc).unwrap())
        });
    }
    g.finish();
}

fn spmspm_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmspm");
    g.sample_size(10);
    for n in [256, 1024] {
        let p = spmspm(n, 0.01);
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| run_kernel(&p.kernel, &p.inputs).unwrap())
        });
    }
    g.finish();
}

fn spmv_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    let n = 4096;
    for (name, enc) in [
        ("csr", "format(dense,compressed)"),
        ("dcsr", "format(compressed,compressed)"),
        ("cdr", "format(compressed,dense)"),
    ] {
        let p = spmv(n, n / 128, enc);
        g.bench_function(name, |b| {
            b.iter(|| run_kernel(&p.kernel, &p.inputs).unwrap())
        });
    }
    g.finish();
}

fn mttkrp_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("mttkrp");
    for (name, enc) in [
        ("dss", "format(dense,compressed,compressed)"),
        (
            "dss-alt",
            "format(dense,compressed,compressed) order(0,2,1)",
        ),
    ] {
        let p = mttkrp(48, enc);
        g.bench_function(name, |b| {
            b.iter(|| run_kernel(&p.kernel, &p.inputs).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pack, spmspm_bench, spmv_bench, mttkrp_bench);
criterion_main!(benches);
