use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polarquant::channel::{transmit, NoiseConfig};
use polarquant::codec::{build_message, crc_attach, polar_encode};
use polarquant::fa_design::{design, DesignParams};
use polarquant::fa_runtime::FaDecoder;
use polarquant::llr_decoder::{sc_decode_with, scl_decode, DecoderWorkspace};
use polarquant::{BitBlock, CodeConfig, Construction, CrcConfig, FaOptions, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 1024;

fn received(cfg: &CodeConfig, crc: Option<&CrcConfig>) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = cfg.k() - crc.map_or(0, |c| c.width() as usize);
    let payload = BitBlock::from_bools((0..k).map(|_| rng.random::<bool>()));
    let info = crc.map_or(payload.clone(), |c| crc_attach(&payload, c));
    let x = polar_encode(&build_message(&info, cfg).unwrap(), cfg).unwrap();
    transmit(&x, &NoiseConfig::new(2.0, 0.5).unwrap(), &mut rng)
}

fn sc(c: &mut Criterion) {
    let cfg = CodeConfig::construct(N, N / 2, Construction::Nr5g).unwrap();
    let llr = received(&cfg, None);
    let mut group = c.benchmark_group("sc-1024");
    let mut ws = DecoderWorkspace::new(&cfg);
    group.bench_function("float", |b| {
        b.iter(|| sc_decode_with(&mut ws, black_box(&llr), &cfg).unwrap())
    });
    for variant in Variant::ALL {
        let (spec, _) = design(&DesignParams::new(N, 0.5, 4, 6, 1.0, variant)).unwrap();
        let dec = FaDecoder::new(&spec, FaOptions::default()).unwrap();
        group.bench_function(BenchmarkId::new("fa-w4", variant), |b| {
            b.iter(|| dec.sc(black_box(&llr), &cfg).unwrap())
        });
    }
    group.finish();
}

fn scl(c: &mut Criterion) {
    let crc = CrcConfig::ccitt16();
    let cfg = CodeConfig::construct(N, N / 2 + 16, Construction::Nr5g).unwrap();
    let llr = received(&cfg, Some(&crc));
    let (spec, _) = design(&DesignParams::new(
        N,
        0.5,
        4,
        6,
        1.0,
        Variant::MsCdNonuniform,
    ))
    .unwrap();
    let dec = FaDecoder::new(&spec, FaOptions::default()).unwrap();
    let mut group = c.benchmark_group("scl-1024");
    group.sample_size(20);
    for list in [8, 32] {
        group.bench_function(BenchmarkId::new("float", list), |b| {
            b.iter(|| scl_decode(black_box(&llr), &cfg, list, Some(&crc)).unwrap())
        });
        group.bench_function(BenchmarkId::new("ms-cd-w4", list), |b| {
            b.iter(|| dec.scl(black_box(&llr), &cfg, list, Some(&crc)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sc, scl);
criterion_main!(benches);
