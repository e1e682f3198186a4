use polarquant::channel::{transmit, NoiseConfig};
use polarquant::codec::{build_message, crc_attach, polar_encode};
use polarquant::fa_design::{design, DesignParams, LowerParams, UpperParams};
use polarquant::fa_runtime::{fa_sc_decode, materialize_lower_lut, FaDecoder};
use polarquant::{
    BitBlock, CodeConfig, Construction, Conversion, CrcConfig, Error, FaOptions, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn code(len: usize, k: usize) -> CodeConfig {
    CodeConfig::construct(len, k, Construction::Nr5g).unwrap()
}

fn frame(cfg: &CodeConfig, rng: &mut ChaCha8Rng, noise: &NoiseConfig) -> (BitBlock, Vec<f64>) {
    let info = BitBlock::from_bools((0..cfg.k()).map(|_| rng.random::<bool>()));
    let u = build_message(&info, cfg).unwrap();
    let llr = transmit(&polar_encode(&u, cfg).unwrap(), noise, rng);
    (u, llr)
}

#[test]
fn noiseless_channel_recovers_every_codeword() {
    let cfg = code(256, 128);
    let (spec, _) = design(&DesignParams::new(
        256,
        0.5,
        3,
        6,
        2.0,
        Variant::MsCdNonuniform,
    ))
    .unwrap();
    let dec = FaDecoder::new(&spec, FaOptions::default()).unwrap();
    let noise = NoiseConfig::from_sigma(1e-3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let (u, llr) = frame(&cfg, &mut rng, &noise);
        assert_eq!(dec.sc(&llr, &cfg).unwrap(), u);
    }
}

#[test]
fn lookup_table_variant_equals_its_materialized_form() {
    let cfg = code(128, 64);
    let (spec, _) = design(&DesignParams::new(
        128,
        0.5,
        3,
        6,
        1.0,
        Variant::MsCdUniform,
    ))
    .unwrap();
    let mut lut_spec = spec.clone();
    lut_spec.variant = Variant::MsIb;
    for node in &mut lut_spec.nodes {
        node.lower = LowerParams::Lut {
            table: materialize_lower_lut(
                &node.lower,
                spec.w,
                spec.w_internal,
                Conversion::Accurate,
            ),
        };
    }
    lut_spec.validate().unwrap();
    let a = FaDecoder::new(&spec, FaOptions::default()).unwrap();
    let b = FaDecoder::new(&lut_spec, FaOptions::default()).unwrap();
    let noise = NoiseConfig::new(1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let (_, llr) = frame(&cfg, &mut rng, &noise);
        assert_eq!(a.sc(&llr, &cfg).unwrap(), b.sc(&llr, &cfg).unwrap());
    }
}

#[test]
fn list_of_one_equals_sc() {
    let cfg = code(128, 64);
    let (spec, _) = design(&DesignParams::new(128, 0.5, 4, 6, 1.0, Variant::IbIb)).unwrap();
    let dec = FaDecoder::new(&spec, FaOptions::default()).unwrap();
    let noise = NoiseConfig::new(1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let (_, llr) = frame(&cfg, &mut rng, &noise);
        let u = dec.sc(&llr, &cfg).unwrap();
        let info: Vec<u8> = cfg.info_set().iter().map(|&i| u.as_slice()[i]).collect();
        assert_eq!(dec.scl(&llr, &cfg, 1, None).unwrap().as_slice(), &info[..]);
    }
}

#[test]
fn crc_aided_list_beats_sc() {
    let crc = CrcConfig::ccitt16();
    let cfg = code(128, 64 + 16);
    let (spec, _) = design(&DesignParams::new(
        128,
        0.5,
        4,
        6,
        1.5,
        Variant::MsCdNonuniform,
    ))
    .unwrap();
    let dec = FaDecoder::new(&spec, FaOptions::default()).unwrap();
    let noise = NoiseConfig::new(1.5, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut sc_errors, mut scl_errors) = (0, 0);
    for _ in 0..400 {
        let payload = BitBlock::from_bools((0..64).map(|_| rng.random::<bool>()));
        let info = crc_attach(&payload, &crc);
        let u = build_message(&info, &cfg).unwrap();
        let llr = transmit(&polar_encode(&u, &cfg).unwrap(), &noise, &mut rng);
        sc_errors += usize::from(dec.sc(&llr, &cfg).unwrap() != u);
        scl_errors += usize::from(dec.scl(&llr, &cfg, 8, Some(&crc)).unwrap() != payload);
    }
    assert!(
        sc_errors > 0 && scl_errors < sc_errors,
        "SC {sc_errors}, SCL {scl_errors}"
    );
}

#[test]
fn simplified_conversion_stays_close_to_accurate() {
    let cfg = code(256, 128);
    let (spec, _) = design(&DesignParams::new(
        256,
        0.5,
        4,
        6,
        1.0,
        Variant::MsCdNonuniform,
    ))
    .unwrap();
    let noise = NoiseConfig::new(2.0, 0.5).unwrap();
    let count = |options| {
        let dec = FaDecoder::new(&spec, options).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (0..1500)
            .filter(|_| {
                let (u, llr) = frame(&cfg, &mut rng, &noise);
                dec.sc(&llr, &cfg).unwrap() != u
            })
            .count()
    };
    let accurate = count(FaOptions::default());
    let simplified = count(FaOptions {
        conversion: Conversion::Simplified,
        alt_sign_invert: false,
    });
    let alternating = count(FaOptions {
        conversion: Conversion::Simplified,
        alt_sign_invert: true,
    });
    assert!(accurate > 10, "{accurate}");
    for other in [simplified, alternating] {
        assert!(
            (other as f64) < 1.6 * accurate as f64 + 10.0,
            "{accurate} vs {other}"
        );
    }
}

#[test]
fn min_sum_upper_is_used_by_min_sum_variants() {
    let (spec, _) = design(&DesignParams::new(16, 0.5, 3, 6, 1.0, Variant::MsCdUniform)).unwrap();
    assert!(spec.nodes.iter().all(|n| n.upper == UpperParams::Minsum));
    let (spec, _) = design(&DesignParams::new(16, 0.5, 3, 6, 1.0, Variant::IbIb)).unwrap();
    assert!(spec
        .nodes
        .iter()
        .all(|n| matches!(n.upper, UpperParams::Lut { .. })));
}

#[test]
fn spec_and_code_length_must_agree() {
    let (spec, _) = design(&DesignParams::new(64, 0.5, 3, 6, 1.0, Variant::MsCdUniform)).unwrap();
    let cfg = code(128, 64);
    let err = fa_sc_decode(&vec![1.0; 128], &spec, &cfg, FaOptions::default()).unwrap_err();
    assert!(matches!(err, Error::SpecMismatch(_)));
}
