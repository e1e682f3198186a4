use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polarquant::channel::NoiseConfig;
use polarquant::fa_design::{
    design, design_channel_quantizer, evolve_lower, DesignParams, LowerKind,
};
use polarquant::infoquant::default_scale_grid;
use polarquant::Variant;

fn lower_updates(c: &mut Criterion) {
    let noise = NoiseConfig::new(1.0, 0.5).unwrap();
    let (_, p) = design_channel_quantizer(&noise, 4).unwrap();
    let grid = default_scale_grid();
    let mut group = c.benchmark_group("evolve-lower-w4");
    for kind in LowerKind::ALL {
        group.bench_function(BenchmarkId::from_parameter(kind.name()), |b| {
            b.iter(|| evolve_lower(black_box(&p), &p, kind, 6, &grid).unwrap())
        });
    }
    group.finish();
}

fn full_design(c: &mut Criterion) {
    let mut group = c.benchmark_group("design");
    group.sample_size(10);
    for len in [64, 256] {
        group.bench_function(BenchmarkId::new("ms-cd-nonuniform-w4", len), |b| {
            b.iter(|| {
                design(&DesignParams::new(
                    len,
                    0.5,
                    4,
                    6,
                    1.0,
                    Variant::MsCdNonuniform,
                ))
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, lower_updates, full_design);
criterion_main!(benches);
