use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use topiceval_bench::blobs;
use topiceval_core::embed::{hdbscan, kmeans, reduce_pca, HdbscanParams};

fn clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("hdbscan");
    group.sample_size(10);
    for n in [500, 2_000] {
        let x = blobs(n, 5, 8, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| hdbscan(black_box(x), HdbscanParams::default()).unwrap())
        });
    }
    group.finish();

    let x = blobs(2_000, 5, 8, 4);
    c.bench_function("kmeans_2000_k8", |b| b.iter(|| kmeans(black_box(&x), 8, 1, 100).unwrap()));

    let wide = blobs(2_000, 384, 20, 5);
    c.bench_function("pca_2000x384_to_5", |b| b.iter(|| reduce_pca(black_box(&wide), 5).unwrap()));
}

criterion_group!(benches, clustering);
criterion_main!(benches);
