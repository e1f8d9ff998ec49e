use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use twh_core::painleve::hastings_mcleod;
use twh_core::{airy_kernel, nystrom_lndet, pii_equation, NystromConfig};

fn nystrom(c: &mut Criterion) {
    let kernel = airy_kernel();
    let mut g = c.benchmark_group("nystrom_lndet");
    for m in [60, 120] {
        let cfg = NystromConfig { m, l: 4.0 };
        g.bench_function(format!("m{m}"), |b| b.iter(|| nystrom_lndet(&kernel, black_box(-2.0), &cfg).unwrap()));
    }
    g.finish();
}

fn hierarchy(c: &mut Criterion) {
    let mut g = c.benchmark_group("pii_equation");
    for n in [1, 3, 5] {
        g.bench_function(format!("n{n}"), |b| b.iter(|| pii_equation(black_box(n)).unwrap()));
    }
    g.finish();
}

fn collocation(c: &mut Criterion) {
    let mut g = c.benchmark_group("hastings_mcleod");
    g.sample_size(10);
    for degree in [200, 300] {
        g.bench_function(format!("degree{degree}"), |b| b.iter(|| hastings_mcleod((-14.0, 12.0), black_box(degree)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, nystrom, hierarchy, collocation);
criterion_main!(benches);
