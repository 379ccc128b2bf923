use alonlab::models::sample;
use alonlab::par::{par_map, seq_map, worker_count};
use alonlab::spectrum::spectrum;
use alonlab::{ModelId, ModelTag};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn lambda2_of(model: ModelId, i: u64) -> f64 {
    let g = sample(model, 17, i).expect("feasible model");
    spectrum(&g).expect("nonempty graph").lambda2()
}

fn sample_spectra(c: &mut Criterion) {
    let workers = worker_count(None);
    let mut group = c.benchmark_group("lambda2_batch");
    group.sample_size(10);
    for n in [100usize, 200] {
        let model = ModelId::new(ModelTag::G, 4, n).expect("feasible model");
        let batch = 32u64;
        group.bench_with_input(BenchmarkId::new("sequential", n), &model, |b, &m| {
            b.iter(|| black_box(seq_map(0..batch, |i| lambda2_of(m, i))))
        });
        group.bench_with_input(BenchmarkId::new(format!("parallel_{workers}"), n), &model, |b, &m| {
            b.iter(|| black_box(par_map(0..batch, workers, |i| lambda2_of(m, i))))
        });
    }
    group.finish();
}

criterion_group!(benches, sample_spectra);
criterion_main!(benches);
