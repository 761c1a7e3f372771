use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use salfuse::batch;
use salfuse::fusion::{additive_fuse, positive_feedback_fuse, FusionConfig};
use salfuse::synth::{robustness_fixture, FixtureSample};

fn fixture(count: usize, size: usize) -> Vec<FixtureSample> {
    robustness_fixture(&mut ChaCha8Rng::seed_from_u64(20), count, size, 4)
}

fn single_image(c: &mut Criterion) {
    let sample = fixture(1, 320).remove(0);
    let cfg = FusionConfig::default();
    let mut group = c.benchmark_group("fuse_320x320_4_branches");
    group.bench_function("positive_feedback", |b| {
        b.iter(|| positive_feedback_fuse(&sample.branches, &cfg).unwrap())
    });
    group.bench_function("additive", |b| b.iter(|| additive_fuse(&sample.branches).unwrap()));
    group.finish();
}

fn batch_modes(c: &mut Criterion) {
    let samples = fixture(32, 320);
    let cfg = FusionConfig::default();
    let run = |s: &FixtureSample| positive_feedback_fuse(&s.branches, &cfg).unwrap().1.iterations;

    let mut group = c.benchmark_group("batch_32_images");
    group.throughput(Throughput::Elements(samples.len() as u64));
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| batch::map_sequential(&samples, run)));
    #[cfg(feature = "parallel")]
    for jobs in [2, batch::default_jobs()] {
        group.bench_with_input(BenchmarkId::new("rayon", jobs), &jobs, |b, &jobs| {
            b.iter(|| batch::map_parallel(&samples, jobs, run))
        });
    }
    group.finish();
}

criterion_group!(benches, single_image, batch_modes);
criterion_main!(benches);
