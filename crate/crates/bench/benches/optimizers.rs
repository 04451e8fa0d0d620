use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use sgdf_bench::gradient_fixture;
use sgdf_core::diagnostics::hutchinson_trace;
use sgdf_core::langevin::{langevin_sample, LangevinConfig, Potential1D};
use sgdf_core::{AdamHyperparams, OptimizerSpec, ParamVector, RngStream, SgdHyperparams, SgdfHyperparams};

fn optimizer_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    let specs = [
        OptimizerSpec::Sgd(SgdHyperparams::default()),
        OptimizerSpec::Adam(AdamHyperparams::default()),
        OptimizerSpec::Sgdf(SgdfHyperparams::default()),
        OptimizerSpec::WienerAdam(AdamHyperparams::default()),
    ];
    for dim in [1_000usize, 100_000] {
        let grads = gradient_fixture(dim, 8, 1);
        group.throughput(Throughput::Elements(dim as u64));
        for spec in &specs {
            group.bench_with_input(BenchmarkId::new(spec.label(), dim), &dim, |b, &dim| {
                let mut opt = spec.build(dim).unwrap();
                let mut theta = ParamVector::zeros(dim);
                let mut i = 0;
                b.iter(|| {
                    i = (i + 1) % grads.len();
                    black_box(opt.step(&mut theta, &grads[i]).unwrap());
                });
            });
        }
    }
    group.finish();
}

fn langevin(c: &mut Criterion) {
    let pot = Potential1D::double_well(-2.5, 2.5).unwrap();
    let cfg = LangevinConfig { diffusion: 0.5, floor: 0.25, dt: 1e-3, n_samples: 10_000, burn_in: 0, thin: 1, initial: 0.0 };
    c.bench_function("langevin_10k", |b| {
        b.iter(|| black_box(langevin_sample(&pot, &cfg, &mut RngStream::new(1, 0)).unwrap()))
    });
}

fn hutchinson(c: &mut Criterion) {
    let diag: Vec<f64> = (1..=256).map(|i| i as f64).collect();
    c.bench_function("hutchinson_256x100", |b| {
        b.iter(|| {
            let op = |x: &[f64]| x.iter().zip(&diag).map(|(a, d)| a * d).collect::<Vec<_>>();
            black_box(hutchinson_trace(op, 256, 100, &mut RngStream::new(2, 0)).unwrap())
        })
    });
}

criterion_group!(benches, optimizer_steps, langevin, hutchinson);
criterion_main!(benches);
