use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use roundsphere::uniformize::{center, uniformize};
use roundsphere::Tolerances;
use roundsphere_bench::{sample_metric, BAND_LIMITS};

fn solvers(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for l in BAND_LIMITS {
        let metric = sample_metric(l);
        group.bench_with_input(BenchmarkId::new("center", l), metric.conformal_factor(), |b, w| {
            b.iter(|| center(w, &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("uniformize", l), &metric, |b, m| {
            b.iter(|| uniformize(m, &tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
