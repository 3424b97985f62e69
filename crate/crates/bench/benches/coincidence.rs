use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use homlab_bench::poisson_stream;
use homlab_core::tagstream::{count_coincidences, histogram_streams, histogram_streams_parallel, nfold};

fn two_fold(c: &mut Criterion) {
    let a = poisson_stream(0, 1e6, 2.0, 1);
    let b = poisson_stream(1, 1e6, 2.0, 2);
    let mut g = c.benchmark_group("two-fold");
    g.throughput(Throughput::Elements((a.len() + b.len()) as u64));
    g.sample_size(10);
    g.bench_function("count 7 ns", |x| x.iter(|| count_coincidences(&a, &b, 7000, 0).unwrap()));
    g.bench_function("histogram 0.1 ns over 20 ns", |x| {
        x.iter(|| histogram_streams(&a, &b, 100, -10_000, 10_000).unwrap())
    });
    for chunk in [1 << 16, 1 << 20] {
        g.bench_with_input(BenchmarkId::new("histogram parallel", chunk), &chunk, |x, &chunk| {
            x.iter(|| histogram_streams_parallel(&a, &b, 100, -10_000, 10_000, chunk).unwrap())
        });
    }
    g.finish();
}

fn four_fold(c: &mut Criterion) {
    let s: Vec<_> = (0..4).map(|k| poisson_stream(k, 6e5, 1.0, 10 + k as u64)).collect();
    let refs: Vec<_> = s.iter().collect();
    let mut g = c.benchmark_group("four-fold");
    g.throughput(Throughput::Elements(s.iter().map(|x| x.len() as u64).sum()));
    g.sample_size(10);
    g.bench_function("nfold 7 ns", |x| x.iter(|| nfold(&refs, 7000).unwrap()));
    g.finish();
}

criterion_group!(benches, two_fold, four_fold);
criterion_main!(benches);
