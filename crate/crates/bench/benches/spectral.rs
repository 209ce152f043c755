use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use roundsphere::s2field::{analyze, gauss_curvature, synthesize, ConformalMetric};
use roundsphere_bench::{sample_field, BAND_LIMITS};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for l in BAND_LIMITS {
        let f = sample_field(l);
        let coeffs = analyze(&f);
        group.bench_with_input(BenchmarkId::new("analyze", l), &f, |b, f| b.iter(|| analyze(f)));
        group.bench_with_input(BenchmarkId::new("synthesize", l), &coeffs, |b, c| {
            b.iter(|| synthesize(c, f.grid()).unwrap())
        });
        let metric = ConformalMetric::new(1.0, f.map(|v| 0.05 * v), None).unwrap();
        group.bench_with_input(BenchmarkId::new("gauss_curvature", l), &metric, |b, m| b.iter(|| gauss_curvature(m)));
    }
    group.finish();
}

criterion_group!(benches, transforms);
criterion_main!(benches);
