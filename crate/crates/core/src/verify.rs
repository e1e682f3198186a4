//! Exhaustive self-checks of the bit-level runtime against arithmetic
//! oracles, and of a fresh design against its information-theoretic bounds.

use std::fmt;

use crate::fa_design::{design, DecoderSpec, DesignParams, DesignReport, LowerParams, Variant};
use crate::fa_runtime::{
    cd_lower_update, materialize_lower_lut, minsum_upper, nonuniform_quantize, pack_lower_index,
    sm_to_twos_accurate, sm_to_twos_simplified, twos_to_sm_accurate, twos_to_sm_simplified,
    uniform_quantize, uniform_quantize_word, Conversion, FiniteMessage, SignMagnitude,
    TwosComplement,
};
use crate::Result;

/// `(sign-magnitude input, two's-complement output)` at `w′ = 3`, accurate.
pub const ACCURATE_SM_TO_TWOS: [(u32, u32); 8] = [
    (0b000, 0b000),
    (0b001, 0b001),
    (0b010, 0b010),
    (0b011, 0b011),
    (0b111, 0b101),
    (0b110, 0b110),
    (0b101, 0b111),
    (0b100, 0b000),
];

/// `(two's-complement input, sign-magnitude output)`; `None` has no image.
pub const ACCURATE_TWOS_TO_SM: [(u32, Option<u32>); 8] = [
    (0b000, Some(0b000)),
    (0b001, Some(0b001)),
    (0b010, Some(0b010)),
    (0b011, Some(0b011)),
    (0b100, None),
    (0b101, Some(0b111)),
    (0b110, Some(0b110)),
    (0b111, Some(0b101)),
];

pub const SIMPLIFIED_SM_TO_TWOS: [(u32, u32); 8] = [
    (0b000, 0b000),
    (0b001, 0b001),
    (0b010, 0b010),
    (0b011, 0b011),
    (0b111, 0b100),
    (0b110, 0b101),
    (0b101, 0b110),
    (0b100, 0b111),
];

pub const SIMPLIFIED_TWOS_TO_SM: [(u32, Option<u32>); 8] = [
    (0b000, Some(0b000)),
    (0b001, Some(0b001)),
    (0b010, Some(0b010)),
    (0b011, Some(0b011)),
    (0b100, None),
    (0b101, Some(0b110)),
    (0b110, Some(0b101)),
    (0b111, Some(0b100)),
];

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_failures(name: &str, total: usize, failures: Vec<String>) -> Check {
        let detail = match failures.first() {
            None => format!("{total} cases"),
            Some(first) => format!("{} of {total} cases failed, first: {first}", failures.len()),
        };
        Check {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Every row of the four `w′ = 3` conversion tables.
pub fn check_conversion_tables() -> Check {
    let mut fails = Vec::new();
    let mut total = 0;
    let mut row = |ok: bool, what: String| {
        total += 1;
        if !ok {
            fails.push(what);
        }
    };
    for (a, b) in ACCURATE_SM_TO_TWOS {
        let got = sm_to_twos_accurate(SignMagnitude::from_bits(a, 3)).bits();
        row(got == b, format!("accurate sm {a:03b} -> {got:03b}"));
    }
    for (b, a) in ACCURATE_TWOS_TO_SM {
        let (got, saturated) = twos_to_sm_accurate(TwosComplement::from_bits(b, 3));
        let ok = match a {
            Some(a) => got.bits() == a && !saturated,
            None => saturated,
        };
        row(ok, format!("accurate 2's {b:03b} -> {:03b}", got.bits()));
    }
    for (a, b) in SIMPLIFIED_SM_TO_TWOS {
        let got = sm_to_twos_simplified(SignMagnitude::from_bits(a, 3)).bits();
        row(got == b, format!("simplified sm {a:03b} -> {got:03b}"));
    }
    for (b, a) in SIMPLIFIED_TWOS_TO_SM {
        if let Some(a) = a {
            let got = twos_to_sm_simplified(TwosComplement::from_bits(b, 3)).bits();
            row(got == a, format!("simplified 2's {b:03b} -> {got:03b}"));
        }
    }
    Check::from_failures("conversion tables", total, fails)
}

/// Round trips of the accurate pair and the bias of the simplified adder
/// path, exhaustively for `3 ≤ w′ ≤ max_width`.
pub fn check_conversion_properties(max_width: u32) -> Check {
    let mut fails = Vec::new();
    let mut total = 0;
    for wi in 3..=max_width {
        let iota = (1i32 << (wi - 1)) - 1;
        for v in -iota..=iota {
            total += 1;
            let a = SignMagnitude::from_value(v, wi);
            let b = sm_to_twos_accurate(a);
            let (back, sat) = twos_to_sm_accurate(b);
            if b.value() != v || back != a || sat {
                fails.push(format!("w'={wi} round trip of {v}"));
            }
        }
        for x in -iota..=iota {
            for y in -iota..=iota {
                total += 1;
                let sx =
                    sm_to_twos_simplified(SignMagnitude::from_value(x, wi)).sign_extend(wi + 1);
                let sy =
                    sm_to_twos_simplified(SignMagnitude::from_value(y, wi)).sign_extend(wi + 1);
                let got = twos_to_sm_simplified(sx.wrapping_add(sy)).value();
                if (got - (x + y)).abs() > 2 {
                    fails.push(format!("w'={wi}: {x} + {y} -> {got}"));
                }
            }
        }
    }
    Check::from_failures("conversion properties", total, fails)
}

/// Bit-logic quantizers against their arithmetic definitions.
pub fn check_quantizers(w: u32, w_internal: u32) -> Check {
    let mut fails = Vec::new();
    let mut total = 0;
    let span = 1i32 << w_internal;
    let top = 1i32 << (w - 1);
    for r in 0..=5 {
        for y in -(span / 2 - 1)..span / 2 {
            total += 1;
            let expect = (y.abs() / (1 << r) + 1).min(top);
            let expect = if y < 0 { -expect } else { expect };
            let word =
                uniform_quantize_word(SignMagnitude::from_value(y, w_internal), r, w).value();
            let arith = uniform_quantize(y, r, w).value();
            if i32::from(word) != expect || i32::from(arith) != expect {
                fails.push(format!("uniform y={y} r={r}"));
            }
        }
    }
    let thresholds: Vec<i32> = (1..top).map(|i| 3 * i * i - 2).collect();
    for y in -span..=span {
        total += 1;
        let linear = 1 + thresholds.iter().filter(|&&t| t < y.abs()).count() as i32;
        let linear = if y < 0 { -linear } else { linear };
        if i32::from(nonuniform_quantize(y, &thresholds, w).value()) != linear {
            fails.push(format!("nonuniform y={y}"));
        }
    }
    Check::from_failures("quantizers", total, fails)
}

/// Closure, commutativity and sign covariance of the min-sum update.
pub fn check_minsum(w: u32) -> Check {
    let mut fails = Vec::new();
    let mut total = 0;
    for a in FiniteMessage::all(w) {
        for b in FiniteMessage::all(w) {
            total += 1;
            let m = minsum_upper(a, b);
            let expect =
                a.value().signum() * b.value().signum() * a.magnitude().min(b.magnitude()) as i8;
            if m.value() != expect || minsum_upper(b, a) != m || minsum_upper(-a, b) != -m {
                fails.push(format!("{} {}", a.value(), b.value()));
            }
        }
    }
    Check::from_failures("min-sum update", total, fails)
}

/// At every computational-domain node: the accurate datapath, its
/// materialized table and integer arithmetic agree on all inputs.
pub fn check_lower_equivalence(spec: &DecoderSpec) -> Check {
    let (w, wi) = (spec.w, spec.w_internal);
    let mut fails = Vec::new();
    let mut total = 0;
    for node in &spec.nodes {
        let (phi_a, phi_b) = match &node.lower {
            LowerParams::CdNonuniform { phi_a, phi_b, .. }
            | LowerParams::CdUniform { phi_a, phi_b, .. } => (phi_a, phi_b),
            LowerParams::Lut { .. } => continue,
        };
        let table = materialize_lower_lut(&node.lower, w, wi, Conversion::Accurate);
        for u0 in 0..2u8 {
            for a in FiniteMessage::all(w) {
                for b in FiniteMessage::all(w) {
                    total += 1;
                    let signed = |phi: &[u32], t: FiniteMessage, flip: bool| {
                        let v = phi[t.magnitude() as usize - 1] as i32;
                        if t.is_negative() != flip {
                            -v
                        } else {
                            v
                        }
                    };
                    let y = signed(phi_a, a, u0 == 1) + signed(phi_b, b, false);
                    let oracle = match &node.lower {
                        LowerParams::CdNonuniform { thresholds, .. } => {
                            nonuniform_quantize(y, thresholds, w)
                        }
                        LowerParams::CdUniform { shift, .. } => uniform_quantize(y, *shift, w),
                        LowerParams::Lut { .. } => unreachable!(),
                    };
                    let cd = cd_lower_update(a, b, u0, &node.lower, w, wi, Conversion::Accurate);
                    let lut = FiniteMessage::new(table[pack_lower_index(a, b, u0, w)], w);
                    if cd.as_ref().ok() != Some(&oracle) || lut.as_ref().ok() != Some(&oracle) {
                        fails.push(format!(
                            "node {:?} ({}, {}, {u0})",
                            node.node_id,
                            a.value(),
                            b.value()
                        ));
                    }
                }
            }
        }
    }
    Check::from_failures("lower datapath equivalence", total, fails)
}

/// MI ordering of the candidate updates and the per-node information bound.
pub fn check_design_report(report: &DesignReport, slack: f64) -> Check {
    let mut fails = Vec::new();
    for n in &report.nodes {
        if n.lower_lut_mi < n.lower_cd_nonuniform_mi - slack
            || n.lower_cd_nonuniform_mi < n.lower_cd_uniform_mi - slack
        {
            fails.push(format!(
                "node {:?}: lut {} cd-nonuniform {} cd-uniform {}",
                n.node_id, n.lower_lut_mi, n.lower_cd_nonuniform_mi, n.lower_cd_uniform_mi
            ));
        }
        if n.upper_lut_mi < n.upper_minsum_mi - slack {
            fails.push(format!("node {:?}: upper lut below min-sum", n.node_id));
        }
        if n.upper_out_mi + n.lower_out_mi > 2.0 * n.input_mi + 1e-9 {
            fails.push(format!(
                "node {:?}: children carry more than the inputs",
                n.node_id
            ));
        }
    }
    Check::from_failures("design information ordering", report.nodes.len(), fails)
}

/// Parameters of the design exercised by [`run_verification`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub len: usize,
    pub w: u32,
    pub w_internal: u32,
    pub design_ebn0_db: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            len: 1024,
            w: 4,
            w_internal: 6,
            design_ebn0_db: 0.5,
        }
    }
}

/// Runs every check, designing one non-uniform computational-domain decoder.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = vec![
        check_conversion_tables(),
        check_conversion_properties(9),
        check_quantizers(4, 9),
        check_minsum(opts.w),
    ];
    let params = DesignParams::new(
        opts.len,
        0.5,
        opts.w,
        opts.w_internal,
        opts.design_ebn0_db,
        Variant::MsCdNonuniform,
    );
    let (spec, report) = design(&params)?;
    checks.push(check_lower_equivalence(&spec));
    checks.push(check_design_report(&report, 1e-12));
    let text = spec.to_json()?;
    let round_trip = DecoderSpec::from_json(&text)?.to_json()? == text;
    checks.push(Check {
        name: "spec round trip".into(),
        passed: round_trip,
        detail: format!("{} bytes", text.len()),
    });
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_checks_pass() {
        for c in [
            check_conversion_tables(),
            check_conversion_properties(6),
            check_quantizers(4, 9),
            check_minsum(4),
        ] {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn small_verification_passes() {
        let opts = VerifyOptions {
            len: 16,
            ..VerifyOptions::default()
        };
        let r = run_verification(&opts).unwrap();
        assert!(r.all_passed(), "{r}");
    }
}
