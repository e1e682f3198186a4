//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.
//!
//! Pass a substring to run only the criteria whose name contains it.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use polarquant::fa_design::{design, DesignParams, DesignReport};
use polarquant::harness::{
    complexity_table, run_bler, run_bler_with_workers, CodeSection, CrcSection, DecoderKind,
    DecoderSection, StoppingSection,
};
use polarquant::infoquant::{cluster_information, optimal_symmetric_quantization, FoldedChannel};
use polarquant::verify::{
    check_conversion_properties, check_conversion_tables, check_lower_equivalence,
};
use polarquant::{BlerRecord, Construction, DecoderSpec, ExperimentConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Designed {
    spec: DecoderSpec,
    report: DesignReport,
    path: PathBuf,
    elapsed: Duration,
}

fn workdir() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| tempfile::tempdir().unwrap()).path()
}

fn designed(name: &str, w: u32, ebn0: f64) -> Designed {
    let start = Instant::now();
    let (spec, report) = design(&DesignParams::new(
        1024,
        0.5,
        w,
        6,
        ebn0,
        Variant::MsCdNonuniform,
    ))
    .unwrap();
    let elapsed = start.elapsed();
    let path = workdir().join(name);
    spec.save(&path).unwrap();
    Designed {
        spec,
        report,
        path,
        elapsed,
    }
}

/// 4-bit non-uniform MS-CD decoder designed at 0.5 dB.
fn four_bit() -> &'static Designed {
    static D: OnceLock<Designed> = OnceLock::new();
    D.get_or_init(|| designed("w4.json", 4, 0.5))
}

/// 2-bit non-uniform MS-CD decoder designed at 3.5 dB.
fn two_bit() -> &'static Designed {
    static D: OnceLock<Designed> = OnceLock::new();
    D.get_or_init(|| designed("w2.json", 2, 3.5))
}

struct Run<'a> {
    kind: DecoderKind,
    spec: Option<&'a Path>,
    ebn0: &'a [f64],
    list: usize,
    crc: bool,
    min_errors: u64,
    max_frames: u64,
}

impl Run<'_> {
    fn config(&self, len: usize) -> ExperimentConfig {
        ExperimentConfig {
            seed: 20_240_601,
            workers: None,
            ebn0_db: self.ebn0.to_vec(),
            list_size: self.list,
            zero_payload: false,
            code: CodeSection {
                len,
                k: len / 2,
                construction: Construction::Nr5g,
            },
            decoder: DecoderSection {
                kind: self.kind,
                spec: self.spec.map(Path::to_path_buf),
                conversion: Default::default(),
                alt_sign_invert: false,
                channel_front_end: Default::default(),
                id: None,
            },
            crc: CrcSection {
                enabled: self.crc,
                ..CrcSection::default()
            },
            stopping: StoppingSection {
                min_block_errors: self.min_errors,
                max_frames: self.max_frames,
            },
        }
    }

    fn records(&self) -> Vec<BlerRecord> {
        run_bler(&self.config(1024), None).unwrap()
    }
}

fn describe(r: &BlerRecord) -> String {
    format!(
        "{:.4} at {} dB ({} errors / {} frames)",
        r.bler, r.ebn0_db, r.block_errors, r.frames
    )
}

fn in_window(r: &BlerRecord, lo: f64, hi: f64, min_errors: u64) -> (bool, String) {
    let pass = r.block_errors >= min_errors && (lo..=hi).contains(&r.bler);
    (pass, format!("{} in [{lo}, {hi}]", describe(r)))
}

/// `E_b/N_0` where the BLER curve crosses `target`, interpolating `log10(BLER)`
/// linearly between the first bracketing pair of points.
fn crossing(records: &[BlerRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|p| {
        let (a, b) = (&p[0], &p[1]);
        if a.block_errors == 0 || b.block_errors == 0 || !(a.bler >= target && b.bler <= target) {
            return None;
        }
        let (la, lb, lt) = (a.bler.log10(), b.bler.log10(), target.log10());
        Some(a.ebn0_db + (la - lt) / (la - lb) * (b.ebn0_db - a.ebn0_db))
    })
}

fn c1_lower_equivalence() -> Outcome {
    let start = Instant::now();
    let d = four_bit();
    let check = check_lower_equivalence(&d.spec);
    let took = d.elapsed + start.elapsed();
    let nodes = d.spec.nodes.len();
    outcome(
        check.passed && nodes == 1023 && took < Duration::from_secs(60),
        format!(
            "{nodes} nodes, {}; design + check {:.1} s",
            check.detail,
            took.as_secs_f64()
        ),
    )
}

fn c2_conversions() -> Outcome {
    let tables = check_conversion_tables();
    let props = check_conversion_properties(9);
    outcome(
        tables.passed && props.passed,
        format!("tables: {}; properties: {}", tables.detail, props.detail),
    )
}

fn c3_float_sc() -> Outcome {
    let r = Run {
        kind: DecoderKind::LlrSc,
        spec: None,
        ebn0: &[2.5],
        list: 1,
        crc: false,
        min_errors: 100,
        max_frames: 100_000,
    }
    .records();
    let (pass, detail) = in_window(&r[0], 0.011, 0.022, 50);
    outcome(pass, detail)
}

fn c4_fa_sc() -> Outcome {
    let four = Run {
        kind: DecoderKind::FaSc,
        spec: Some(&four_bit().path),
        ebn0: &[2.5],
        list: 1,
        crc: false,
        min_errors: 100,
        max_frames: 100_000,
    }
    .records();
    let two = Run {
        kind: DecoderKind::FaSc,
        spec: Some(&two_bit().path),
        ebn0: &[4.5],
        list: 1,
        crc: false,
        min_errors: 100,
        max_frames: 100_000,
    }
    .records();
    let (p4, d4) = in_window(&four[0], 0.018, 0.037, 50);
    let (p2, d2) = in_window(&two[0], 0.009, 0.021, 50);
    outcome(p4 && p2, format!("4-bit {d4}; 2-bit {d2}"))
}

fn c5_sc_gap() -> Outcome {
    let grid = [2.25, 2.5, 2.75, 3.0];
    let sweep = |kind, spec| {
        Run {
            kind,
            spec,
            ebn0: &grid,
            list: 1,
            crc: false,
            min_errors: 100,
            max_frames: 60_000,
        }
        .records()
    };
    let float = sweep(DecoderKind::LlrSc, None);
    let fa = sweep(DecoderKind::FaSc, Some(four_bit().path.as_path()));
    match (crossing(&float, 1e-2), crossing(&fa, 1e-2)) {
        (Some(a), Some(b)) => {
            let gap = b - a;
            outcome(
                (0.1..=0.35).contains(&gap),
                format!("float {a:.3} dB, 4-bit {b:.3} dB, gap {gap:.3} dB in [0.1, 0.35]"),
            )
        }
        (a, b) => outcome(
            false,
            format!("1e-2 not bracketed: float {a:?}, 4-bit {b:?}"),
        ),
    }
}

fn c6_crc_scl() -> Outcome {
    let run = |kind, spec| {
        Run {
            kind,
            spec,
            ebn0: &[1.5],
            list: 32,
            crc: true,
            min_errors: 50,
            max_frames: 20_000,
        }
        .records()
    };
    let float = run(DecoderKind::LlrScl, None);
    let fa = run(DecoderKind::FaScl, Some(four_bit().path.as_path()));
    let (pf, df) = in_window(&float[0], 0.0176 / 2.0, 0.0176 * 2.0, 50);
    let (pq, dq) = in_window(&fa[0], 0.0415 / 2.0, 0.0415 * 2.0, 50);
    outcome(pf && pq, format!("float {df}; 4-bit {dq}"))
}

fn c7_mi_ordering() -> Outcome {
    let mut reports: Vec<(String, DesignReport)> =
        vec![("N=1024 w=4 0.5 dB".into(), four_bit().report.clone())];
    for w in [2, 3] {
        for ebn0 in [-1.0, 1.5, 4.0] {
            let (_, r) = design(&DesignParams::new(256, 0.5, w, 6, ebn0, Variant::IbIb)).unwrap();
            reports.push((format!("N=256 w={w} {ebn0} dB"), r));
        }
    }
    let slack = 1e-12;
    let mut nodes = 0;
    let mut fails = Vec::new();
    for (name, r) in &reports {
        for n in &r.nodes {
            nodes += 1;
            let ordered = n.lower_lut_mi >= n.lower_cd_nonuniform_mi - slack
                && n.lower_cd_nonuniform_mi >= n.lower_cd_uniform_mi - slack;
            if !ordered || n.mass_error > 1e-12 || n.symmetry_error > 1e-12 {
                fails.push(format!("{name} node {:?}", n.node_id));
            }
        }
    }
    outcome(
        fails.is_empty(),
        format!(
            "{nodes} nodes over {} designs, {} violations{}",
            reports.len(),
            fails.len(),
            fails
                .first()
                .map(|f| format!(", first: {f}"))
                .unwrap_or_default()
        ),
    )
}

/// Best MI over every contiguous split of sorted magnitudes into at most
/// `levels` clusters, and for small instances over every assignment.
fn brute_force_mi(correct: &[f64], wrong: &[f64], levels: usize) -> f64 {
    let m = correct.len();
    if m <= levels {
        return correct
            .iter()
            .zip(wrong)
            .map(|(&c, &w)| cluster_information(c, w))
            .sum();
    }
    let mut best = f64::NEG_INFINITY;
    if m <= 7 {
        let total = levels.pow(m as u32);
        for code in 0..total {
            let (mut c, mut w) = (vec![0.0; levels], vec![0.0; levels]);
            let mut x = code;
            for i in 0..m {
                c[x % levels] += correct[i];
                w[x % levels] += wrong[i];
                x /= levels;
            }
            best = best.max(
                c.iter()
                    .zip(&w)
                    .map(|(&c, &w)| cluster_information(c, w))
                    .sum(),
            );
        }
        return best;
    }
    // Cut masks over the m − 1 gaps with at most levels − 1 cuts.
    for mask in 0u32..(1 << (m - 1)) {
        if mask.count_ones() as usize > levels - 1 {
            continue;
        }
        let (mut mi, mut c, mut w) = (0.0, 0.0, 0.0);
        for i in 0..m {
            c += correct[i];
            w += wrong[i];
            if i == m - 1 || mask >> i & 1 == 1 {
                mi += cluster_information(c, w);
                c = 0.0;
                w = 0.0;
            }
        }
        best = best.max(mi);
    }
    best
}

fn c8_dp_vs_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(1..=12usize);
        let w = rng.random_range(1..=3u32);
        let items: Vec<(f64, f64, f64)> = (0..m)
            .map(|i| {
                let wrong: f64 = rng.random_range(0.01..1.0);
                let llr = i as f64 * 0.4 + rng.random_range(0.05..0.35);
                (llr, wrong * llr.exp(), wrong)
            })
            .collect();
        let total: f64 = items.iter().map(|&(_, c, w)| c + w).sum();
        let items: Vec<_> = items
            .into_iter()
            .map(|(l, c, w)| (l, c / total, w / total))
            .collect();
        let (folded, _) = FoldedChannel::fold(items.iter().copied());
        let dp = optimal_symmetric_quantization(&folded, w).mi;
        let bf = brute_force_mi(folded.correct(), folded.wrong(), 1 << (w - 1));
        worst = worst.max((dp - bf).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("1000 instances, max |DP − brute force| = {worst:.2e}"),
    )
}

fn c9_complexity() -> Outcome {
    let expected = [(4, [2048, 128, 80]), (3, [384, 64, 40]), (2, [64, 32, 20])];
    let mut got = Vec::new();
    let mut pass = true;
    for (w, bits) in expected {
        let t = complexity_table(1024, w, 6);
        let row: Vec<u64> = t.rows.iter().map(|r| r.bits_per_node).collect();
        let ops: Vec<u32> = t.rows.iter().map(|r| r.ops_per_update).collect();
        pass &= row == bits
            && ops == [0, w, 1]
            && t.rows
                .iter()
                .all(|r| r.total_bits == r.bits_per_node * 1023);
        got.push(format!("w={w}: {row:?}"));
    }
    let names: Vec<&str> = complexity_table(1024, 4, 6)
        .rows
        .iter()
        .map(|r| r.kind.name())
        .collect();
    outcome(pass, format!("{} ({})", got.join(", "), names.join("/")))
}

fn c10_determinism() -> Outcome {
    let mut same = true;
    let mut detail = Vec::new();
    let spec_path = workdir().join("w3-256.json");
    let (spec, _) = design(&DesignParams::new(
        256,
        0.5,
        3,
        6,
        1.5,
        Variant::MsCdUniform,
    ))
    .unwrap();
    spec.save(&spec_path).unwrap();
    for (kind, spec, list) in [
        (DecoderKind::LlrSc, None, 1),
        (DecoderKind::FaScl, Some(spec_path.as_path()), 4),
    ] {
        let run = Run {
            kind,
            spec,
            ebn0: &[1.0, 2.0, 3.0],
            list,
            crc: kind == DecoderKind::FaScl,
            min_errors: 30,
            max_frames: 3_000,
        };
        let config = run.config(256);
        let mut bytes = Vec::new();
        for workers in [1, 8] {
            let out = workdir().join(format!("{kind}-{workers}.csv"));
            run_bler_with_workers(&config, Some(&out), workers).unwrap();
            bytes.push(std::fs::read(&out).unwrap());
        }
        same &= bytes[0] == bytes[1];
        detail.push(format!("{kind}: {} bytes", bytes[0].len()));
    }
    outcome(
        same,
        format!("workers 1 vs 8 identical: {}", detail.join(", ")),
    )
}

fn main() {
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [Criterion; 10] = [
        (
            "lower datapath equals materialized table",
            c1_lower_equivalence,
        ),
        ("binary conversion tables", c2_conversions),
        ("float SC baseline", c3_float_sc),
        ("finite-alphabet SC, 4-bit and 2-bit", c4_fa_sc),
        ("SC degradation gap at 1e-2", c5_sc_gap),
        ("CRC-aided SCL-32", c6_crc_scl),
        ("MI ordering and distribution sanity", c7_mi_ordering),
        ("DP quantizer equals brute force", c8_dp_vs_brute_force),
        ("lower-branch complexity table", c9_complexity),
        ("worker-count determinism", c10_determinism),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
