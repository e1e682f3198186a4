//! Bit-accurate finite-alphabet SC / SCL decoding.
//!
//! Messages live in the symmetric alphabet `±1 … ±2^(w−1)` and are stored as
//! `i8`. Message index order is ascending value: `−2^(w−1) ↦ 0`,
//! `−1 ↦ 2^(w−1) − 1`, `+1 ↦ 2^(w−1)`, `+2^(w−1) ↦ 2^w − 1`.

mod convert;

pub use convert::{
    sm_to_twos_accurate, sm_to_twos_simplified, twos_to_sm_accurate, twos_to_sm_simplified,
    SignMagnitude, TwosComplement,
};

use serde::{Deserialize, Serialize};

use crate::codec::{bit_reversal_permutation, extract_payload, BitBlock, CodeConfig, CrcConfig};
use crate::engine::{self, Kernel, ScWorkspace};
use crate::fa_design::{DecoderSpec, LowerParams, UpperParams};
use crate::llr_decoder::strip_crc;
use crate::{Error, Result};

/// Alphabet size `2^w`.
pub fn message_count(w: u32) -> usize {
    1 << w
}

/// Element of the symmetric alphabet; never zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteMessage(i8);

impl FiniteMessage {
    pub fn new(value: i8, w: u32) -> Result<Self> {
        let max = 1i16 << (w - 1);
        if value == 0 || i16::from(value).abs() > max {
            return Err(Error::InvalidParameter(format!(
                "{value} is not a {w}-bit message"
            )));
        }
        Ok(FiniteMessage(value))
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn magnitude(self) -> u32 {
        u32::from(self.0.unsigned_abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Position in ascending message order.
    pub fn index(self, w: u32) -> usize {
        message_index(self.0, w)
    }

    pub fn from_index(index: usize, w: u32) -> Self {
        FiniteMessage(message_from_index(index, w))
    }

    /// Sign bit followed by `|t| − 1` on `w − 1` bits.
    pub fn to_bits(self, w: u32) -> u8 {
        (u8::from(self.is_negative()) << (w - 1)) | (self.0.unsigned_abs() - 1)
    }

    pub fn from_bits(bits: u8, w: u32) -> Self {
        let magnitude = (bits & ((1 << (w - 1)) - 1)) as i8 + 1;
        FiniteMessage(if bits >> (w - 1) & 1 == 1 {
            -magnitude
        } else {
            magnitude
        })
    }

    /// Every message in ascending order.
    pub fn all(w: u32) -> impl Iterator<Item = FiniteMessage> {
        (0..message_count(w)).map(move |i| FiniteMessage::from_index(i, w))
    }
}

impl std::ops::Neg for FiniteMessage {
    type Output = FiniteMessage;

    fn neg(self) -> FiniteMessage {
        FiniteMessage(-self.0)
    }
}

pub(crate) fn message_index(t: i8, w: u32) -> usize {
    let half = 1i32 << (w - 1);
    let t = i32::from(t);
    (if t < 0 { t + half } else { t + half - 1 }) as usize
}

pub(crate) fn message_from_index(index: usize, w: u32) -> i8 {
    let half = 1i32 << (w - 1);
    let i = index as i32;
    (if i < half { i - half } else { i - half + 1 }) as i8
}

/// Binary conversion pair used inside computational-domain updates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conversion {
    #[default]
    Accurate,
    Simplified,
}

impl std::str::FromStr for Conversion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accurate" => Ok(Conversion::Accurate),
            "simplified" => Ok(Conversion::Simplified),
            _ => Err(Error::InvalidParameter(format!("unknown conversion {s:?}"))),
        }
    }
}

/// Runtime switches that do not change the designed parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FaOptions {
    pub conversion: Conversion,
    /// Odd-numbered elements of every lower update run on negated inputs
    /// and negate the result, spreading the simplified-conversion bias.
    pub alt_sign_invert: bool,
}

/// `sgn(a)·sgn(b)·min(|a|, |b|)`.
pub fn minsum_upper(a: FiniteMessage, b: FiniteMessage) -> FiniteMessage {
    FiniteMessage(minsum(a.0, b.0))
}

fn minsum(a: i8, b: i8) -> i8 {
    let m = a.unsigned_abs().min(b.unsigned_abs()) as i8;
    if (a < 0) != (b < 0) {
        -m
    } else {
        m
    }
}

/// Clip-and-shift quantization `sgn(y)·min(⌊|y|/2^r⌋ + 1, 2^(w−1))`, `y = 0 ↦ +1`.
pub fn uniform_quantize(y: i32, r: u32, w: u32) -> FiniteMessage {
    let m = (y.unsigned_abs() >> r).saturating_add(1).min(1 << (w - 1)) as i8;
    FiniteMessage(if y < 0 { -m } else { m })
}

/// Clip-and-shift on a sign-magnitude word: OR-reduce the bits above the
/// output range to detect saturation, otherwise take the shifted bits.
pub fn uniform_quantize_word(y: SignMagnitude, r: u32, w: u32) -> FiniteMessage {
    FiniteMessage(apply_sign(
        y.is_negative(),
        uniform_magnitude(y.magnitude(), r, w),
    ))
}

pub(crate) fn uniform_magnitude(m: u32, r: u32, w: u32) -> u32 {
    let top = (1 << (w - 1)) - 1;
    let kept = if m >> (r + w - 1) != 0 {
        top
    } else {
        (m >> r) & top
    };
    kept + 1
}

/// Threshold quantization: magnitude `i` for `τ_{i−2} < |y| ≤ τ_{i−1}`; `y = 0 ↦ +1`.
pub fn nonuniform_quantize(y: i32, thresholds: &[i32], w: u32) -> FiniteMessage {
    FiniteMessage(apply_sign(
        y < 0,
        nonuniform_magnitude(y.unsigned_abs() as i64, thresholds, w),
    ))
}

/// Binary search of depth `w − 1` over `2^(w−1) − 1` thresholds.
pub(crate) fn nonuniform_magnitude(abs: i64, thresholds: &[i32], w: u32) -> u32 {
    debug_assert_eq!(thresholds.len(), (1 << (w - 1)) - 1);
    let mut idx = 0usize;
    for bit in (0..w - 1).rev() {
        let probe = idx + (1 << bit);
        if abs > i64::from(thresholds[probe - 1]) {
            idx = probe;
        }
    }
    idx as u32 + 1
}

fn apply_sign(negative: bool, magnitude: u32) -> i8 {
    let m = magnitude as i8;
    if negative {
        -m
    } else {
        m
    }
}

/// Index of `(t_a, t_b)` into an upper table.
pub fn pack_upper_index(a: FiniteMessage, b: FiniteMessage, w: u32) -> usize {
    (a.index(w) << w) | b.index(w)
}

/// Index of `(t_a, t_b, û₀)` into a lower table.
pub fn pack_lower_index(a: FiniteMessage, b: FiniteMessage, u0: u8, w: u32) -> usize {
    (usize::from(u0 & 1) << (2 * w)) | pack_upper_index(a, b, w)
}

pub fn lut_upper_update(a: FiniteMessage, b: FiniteMessage, table: &[i8], w: u32) -> FiniteMessage {
    FiniteMessage(table[pack_upper_index(a, b, w)])
}

pub fn lut_lower_update(
    a: FiniteMessage,
    b: FiniteMessage,
    u0: u8,
    table: &[i8],
    w: u32,
) -> FiniteMessage {
    FiniteMessage(table[pack_lower_index(a, b, u0, w)])
}

#[derive(Clone, Debug, PartialEq)]
enum CdQuantizer {
    Uniform(u32),
    Nonuniform(Vec<i32>),
}

#[derive(Clone, Debug, PartialEq)]
struct CdNode {
    phi_a: Vec<u32>,
    phi_b: Vec<u32>,
    quantizer: CdQuantizer,
}

impl CdNode {
    fn from_params(params: &LowerParams) -> Option<CdNode> {
        match params {
            LowerParams::Lut { .. } => None,
            LowerParams::CdNonuniform {
                phi_a,
                phi_b,
                thresholds,
                ..
            } => Some(CdNode {
                phi_a: phi_a.clone(),
                phi_b: phi_b.clone(),
                quantizer: CdQuantizer::Nonuniform(thresholds.clone()),
            }),
            LowerParams::CdUniform {
                phi_a,
                phi_b,
                shift,
                ..
            } => Some(CdNode {
                phi_a: phi_a.clone(),
                phi_b: phi_b.clone(),
                quantizer: CdQuantizer::Uniform(*shift),
            }),
        }
    }

    /// Translate, convert, add in `w′ + 1` bits, convert back, quantize.
    fn update(&self, a: i8, b: i8, u0: u8, w: u32, wi: u32, conversion: Conversion) -> i8 {
        let sa = SignMagnitude::from_parts(
            (a < 0) != (u0 == 1),
            self.phi_a[a.unsigned_abs() as usize - 1],
            wi,
        );
        let sb = SignMagnitude::from_parts(b < 0, self.phi_b[b.unsigned_abs() as usize - 1], wi);
        let to_twos = match conversion {
            Conversion::Accurate => sm_to_twos_accurate,
            Conversion::Simplified => sm_to_twos_simplified,
        };
        let sum = to_twos(sa)
            .sign_extend(wi + 1)
            .wrapping_add(to_twos(sb).sign_extend(wi + 1));
        let y = match conversion {
            // |sum| ≤ 2ι < 2^w′, so saturation cannot occur here.
            Conversion::Accurate => twos_to_sm_accurate(sum).0,
            Conversion::Simplified => twos_to_sm_simplified(sum),
        };
        let magnitude = match &self.quantizer {
            CdQuantizer::Uniform(r) => uniform_magnitude(y.magnitude(), *r, w),
            CdQuantizer::Nonuniform(t) => nonuniform_magnitude(i64::from(y.magnitude()), t, w),
        };
        apply_sign(y.is_negative(), magnitude)
    }

    #[allow(clippy::too_many_arguments)]
    fn update_with(
        &self,
        j: usize,
        a: i8,
        b: i8,
        u0: u8,
        w: u32,
        wi: u32,
        options: FaOptions,
    ) -> i8 {
        if options.alt_sign_invert && j % 2 == 1 {
            -self.update(-a, -b, u0, w, wi, options.conversion)
        } else {
            self.update(a, b, u0, w, wi, options.conversion)
        }
    }
}

/// Computational-domain lower update `Q((−1)^û₀ φ_a(t_a) + φ_b(t_b))`.
pub fn cd_lower_update(
    a: FiniteMessage,
    b: FiniteMessage,
    u0: u8,
    params: &LowerParams,
    w: u32,
    w_internal: u32,
    conversion: Conversion,
) -> Result<FiniteMessage> {
    let node = CdNode::from_params(params).ok_or_else(|| {
        Error::InvalidParameter("lookup-table node has no computational domain".into())
    })?;
    Ok(FiniteMessage(
        node.update(a.0, b.0, u0, w, w_internal, conversion),
    ))
}

/// Tabulates a lower update over all `2^{2w+1}` inputs.
pub fn materialize_lower_lut(
    params: &LowerParams,
    w: u32,
    w_internal: u32,
    conversion: Conversion,
) -> Vec<i8> {
    if let LowerParams::Lut { table } = params {
        return table.clone();
    }
    let node = CdNode::from_params(params).expect("computational-domain node");
    let mut table = vec![0i8; 1 << (2 * w + 1)];
    for u0 in 0..2u8 {
        for a in FiniteMessage::all(w) {
            for b in FiniteMessage::all(w) {
                table[pack_lower_index(a, b, u0, w)] =
                    node.update(a.0, b.0, u0, w, w_internal, conversion);
            }
        }
    }
    table
}

#[derive(Clone, Debug)]
enum Lower {
    Lut(Vec<i8>),
    Cd(CdNode),
}

/// A decoder spec prepared for repeated decoding; shareable across threads.
#[derive(Clone, Debug)]
pub struct FaDecoder {
    len: usize,
    w: u32,
    w_internal: u32,
    thresholds: Vec<f64>,
    upper: Vec<Option<Vec<i8>>>,
    lower: Vec<Lower>,
    // [upper leaf, lower leaf] magnitudes per last-level node.
    decision: Vec<[Vec<f64>; 2]>,
    options: FaOptions,
}

impl FaDecoder {
    pub fn new(spec: &DecoderSpec, options: FaOptions) -> Result<Self> {
        spec.validate()?;
        let depth = spec.depth();
        let first_last = (1usize << (depth - 1)) - 1;
        Ok(FaDecoder {
            len: spec.len,
            w: spec.w,
            w_internal: spec.w_internal,
            thresholds: spec.channel_quantizer.thresholds.clone(),
            upper: spec
                .nodes
                .iter()
                .map(|n| match &n.upper {
                    UpperParams::Minsum => None,
                    UpperParams::Lut { table } => Some(table.clone()),
                })
                .collect(),
            lower: spec
                .nodes
                .iter()
                .map(|n| match CdNode::from_params(&n.lower) {
                    Some(cd) => Lower::Cd(cd),
                    None => Lower::Lut(materialize_lower_lut(
                        &n.lower,
                        spec.w,
                        spec.w_internal,
                        options.conversion,
                    )),
                })
                .collect(),
            decision: spec.nodes[first_last..]
                .iter()
                .map(|n| {
                    let d = n.decision_llr.as_ref().expect("validated spec");
                    [d.upper.clone(), d.lower.clone()]
                })
                .collect(),
            options,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    /// Channel quantizer applied to one LLR; `0 ↦ +1`.
    pub fn quantize_llr(&self, llr: f64) -> FiniteMessage {
        let m = 1 + self.thresholds.partition_point(|&t| t < llr.abs()) as u32;
        FiniteMessage(apply_sign(llr < 0.0, m))
    }

    fn natural_messages(&self, llrs: &[f64], cfg: &CodeConfig) -> Result<Vec<i8>> {
        if cfg.len() != self.len {
            return Err(Error::SpecMismatch(format!(
                "spec is for N = {}, code has N = {}",
                self.len,
                cfg.len()
            )));
        }
        if llrs.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: llrs.len(),
            });
        }
        let perm = bit_reversal_permutation(cfg.depth());
        Ok(perm.iter().map(|&p| self.quantize_llr(llrs[p]).0).collect())
    }

    /// SC decoding; returns `û` of all `N` bits.
    pub fn sc(&self, llrs: &[f64], cfg: &CodeConfig) -> Result<BitBlock> {
        let msgs = self.natural_messages(llrs, cfg)?;
        let mut ws = ScWorkspace::new(cfg.depth());
        let u = engine::sc(&FaKernel { dec: self }, &msgs, cfg.frozen(), &mut ws);
        BitBlock::from_bits(u)
    }

    /// CRC-aided SCL decoding; returns the data payload.
    pub fn scl(
        &self,
        llrs: &[f64],
        cfg: &CodeConfig,
        list_size: usize,
        crc: Option<&CrcConfig>,
    ) -> Result<BitBlock> {
        if list_size == 0 {
            return Err(Error::InvalidParameter(
                "list size must be at least 1".into(),
            ));
        }
        let msgs = self.natural_messages(llrs, cfg)?;
        let list = engine::scl(&FaKernel { dec: self }, &msgs, cfg.frozen(), list_size);
        Ok(strip_crc(
            extract_payload(engine::select(&list, cfg, crc), cfg),
            crc,
        ))
    }
}

struct FaKernel<'a> {
    dec: &'a FaDecoder,
}

impl Kernel for FaKernel<'_> {
    type Msg = i8;

    fn upper(&self, node: usize, a: &[i8], b: &[i8], out: &mut [i8]) {
        let w = self.dec.w;
        match &self.dec.upper[node] {
            None => {
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o = minsum(x, y);
                }
            }
            Some(table) => {
                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                    *o = table[(message_index(x, w) << w) | message_index(y, w)];
                }
            }
        }
    }

    fn lower(&self, node: usize, a: &[i8], b: &[i8], u: &[u8], out: &mut [i8]) {
        let (w, wi) = (self.dec.w, self.dec.w_internal);
        match &self.dec.lower[node] {
            Lower::Lut(table) => {
                for (((o, &x), &y), &bit) in out.iter_mut().zip(a).zip(b).zip(u) {
                    *o = table[(usize::from(bit) << (2 * w))
                        | (message_index(x, w) << w)
                        | message_index(y, w)];
                }
            }
            Lower::Cd(cd) => {
                for (j, (((o, &x), &y), &bit)) in out.iter_mut().zip(a).zip(b).zip(u).enumerate() {
                    *o = cd.update_with(j, x, y, bit, w, wi, self.dec.options);
                }
            }
        }
    }

    fn decide(&self, _leaf: usize, m: i8) -> u8 {
        u8::from(m < 0)
    }

    fn decision_llr(&self, leaf: usize, m: i8) -> f64 {
        let mag = self.dec.decision[leaf >> 1][leaf & 1][m.unsigned_abs() as usize - 1];
        if m < 0 {
            -mag
        } else {
            mag
        }
    }
}

/// SC decoding with a finite-alphabet spec; returns `û`.
pub fn fa_sc_decode(
    llrs: &[f64],
    spec: &DecoderSpec,
    cfg: &CodeConfig,
    options: FaOptions,
) -> Result<BitBlock> {
    FaDecoder::new(spec, options)?.sc(llrs, cfg)
}

/// CRC-aided SCL decoding with a finite-alphabet spec; returns the payload.
pub fn fa_scl_decode(
    llrs: &[f64],
    spec: &DecoderSpec,
    cfg: &CodeConfig,
    list_size: usize,
    crc: Option<&CrcConfig>,
    options: FaOptions,
) -> Result<BitBlock> {
    FaDecoder::new(spec, options)?.scl(llrs, cfg, list_size, crc)
}
