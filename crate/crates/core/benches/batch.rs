use criterion::{criterion_group, criterion_main, Criterion};

use lbsim::batch::run_sequential;
use lbsim::preset::{preset, Preset};

fn small_batch() -> Preset {
    let mut p = preset("smoke_k4").unwrap().with_seeds(&[1, 2, 3, 4]);
    p.points.truncate(2);
    for pt in &mut p.points {
        pt.scenario.workload.message_packets = 50;
    }
    p
}

fn batch(c: &mut Criterion) {
    let p = small_batch();
    let mut g = c.benchmark_group("batch_k4_8runs");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| run_sequential(&p.points, &|_| {}))
    });
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| {
        b.iter(|| lbsim::batch::run_parallel(&p.points, 0, &|_| {}))
    });
    g.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
