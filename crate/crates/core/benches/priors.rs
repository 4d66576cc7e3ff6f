use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fire_core::degradations::{DegradationSpec, LinearOp, Range};
use fire_core::engine::{fire_hqs, initial_estimate, SolverConfig};
use fire_core::restorers::{PriorTerm, Restorer};
use fire_core::tensor::synthetic::scene;

fn priors() -> Vec<PriorTerm> {
    let noise = DegradationSpec::AdditiveNoise { sigma: Range::new(0.01, 0.05) };
    let blur = DegradationSpec::Blur { kernel_sigma: Range::new(1.0, 2.0), sigma: Range::new(0.0, 0.01) };
    [("wiener", blur.clone()), ("tv", noise.clone()), ("dct", noise), ("wiener:1000", blur)]
        .into_iter()
        .map(|(id, spec)| PriorTerm::new(Arc::new(Restorer::from_id(id).unwrap()), spec, 0.2).unwrap())
        .collect()
}

fn solve(c: &mut Criterion) {
    let reference = scene(64, 64, 3, 0);
    let op = LinearOp::gaussian_blur(1.5).unwrap();
    let y = op.apply(&reference).unwrap();
    let x0 = initial_estimate(&y, &op).unwrap();
    let mut group = c.benchmark_group("fire_hqs_4_priors");
    group.sample_size(10);
    for parallel in [false, true] {
        let mut cfg = SolverConfig::new(priors(), 20.0, 5);
        cfg.parallel_priors = parallel;
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_with_input(BenchmarkId::from_parameter(label), &cfg, |b, cfg| {
            b.iter(|| fire_hqs(black_box(&y), &op, cfg, &x0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solve);
criterion_main!(benches);
