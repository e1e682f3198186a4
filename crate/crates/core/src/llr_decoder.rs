//! Double-precision SC and CRC-aided SCL decoding.

use crate::codec::{bit_reversal_permutation, extract_payload, BitBlock, CodeConfig, CrcConfig};
use crate::engine::{self, Kernel, ScWorkspace};
use crate::{Error, Result};

/// Exact box-plus `log((1 + e^{a+b}) / (e^a + e^b))`.
pub fn boxplus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (p, q) = (a.abs(), b.abs());
    if p.is_infinite() && q.is_infinite() {
        return sign * f64::INFINITY;
    }
    let mag = p.min(q) + (-(p + q)).exp().ln_1p() - (-(p - q).abs()).exp().ln_1p();
    sign * mag.max(0.0)
}

/// `(−1)^u · a + b`.
pub fn g_update(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        a + b
    } else {
        b - a
    }
}

/// `M + ln(1 + e^{−(1−2u)L})`.
pub fn path_metric_update(metric: f64, llr: f64, u: u8) -> f64 {
    metric + engine::metric_increment(llr, u)
}

struct LlrKernel;

impl Kernel for LlrKernel {
    type Msg = f64;

    fn upper(&self, _node: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = boxplus(x, y);
        }
    }

    fn lower(&self, _node: usize, a: &[f64], b: &[f64], u: &[u8], out: &mut [f64]) {
        for (((o, &x), &y), &bit) in out.iter_mut().zip(a).zip(b).zip(u) {
            *o = g_update(x, y, bit);
        }
    }

    fn decide(&self, _leaf: usize, m: f64) -> u8 {
        u8::from(m < 0.0)
    }

    fn decision_llr(&self, _leaf: usize, m: f64) -> f64 {
        m
    }
}

/// Per-level LLR and partial-sum buffers, reusable across frames.
#[derive(Clone, Debug)]
pub struct DecoderWorkspace {
    inner: ScWorkspace<f64>,
    perm: Vec<usize>,
    natural: Vec<f64>,
}

impl DecoderWorkspace {
    pub fn new(cfg: &CodeConfig) -> Self {
        DecoderWorkspace {
            inner: ScWorkspace::new(cfg.depth()),
            perm: bit_reversal_permutation(cfg.depth()),
            natural: vec![0.0; cfg.len()],
        }
    }
}

fn check_len(llrs: &[f64], cfg: &CodeConfig) -> Result<()> {
    if llrs.len() != cfg.len() {
        return Err(Error::LengthMismatch {
            expected: cfg.len(),
            actual: llrs.len(),
        });
    }
    Ok(())
}

fn to_natural_order(llrs: &[f64], perm: &[usize], out: &mut [f64]) {
    for (o, &p) in out.iter_mut().zip(perm) {
        *o = llrs[p];
    }
}

/// SC decoding of channel LLRs; returns the estimate `û` of all `N` bits.
pub fn sc_decode(llrs: &[f64], cfg: &CodeConfig) -> Result<BitBlock> {
    sc_decode_with(&mut DecoderWorkspace::new(cfg), llrs, cfg)
}

/// [`sc_decode`] reusing `ws`.
pub fn sc_decode_with(
    ws: &mut DecoderWorkspace,
    llrs: &[f64],
    cfg: &CodeConfig,
) -> Result<BitBlock> {
    check_len(llrs, cfg)?;
    if ws.natural.len() != cfg.len() {
        return Err(Error::LengthMismatch {
            expected: cfg.len(),
            actual: ws.natural.len(),
        });
    }
    to_natural_order(llrs, &ws.perm, &mut ws.natural);
    let u = engine::sc(&LlrKernel, &ws.natural, cfg.frozen(), &mut ws.inner);
    BitBlock::from_bits(u)
}

/// CRC-aided SCL decoding with `list_size` paths.
///
/// Returns the data payload: the information bits with the trailing CRC bits
/// removed when `crc` is given.
pub fn scl_decode(
    llrs: &[f64],
    cfg: &CodeConfig,
    list_size: usize,
    crc: Option<&CrcConfig>,
) -> Result<BitBlock> {
    check_len(llrs, cfg)?;
    if list_size == 0 {
        return Err(Error::InvalidParameter(
            "list size must be at least 1".into(),
        ));
    }
    let mut natural = vec![0.0; llrs.len()];
    to_natural_order(llrs, &bit_reversal_permutation(cfg.depth()), &mut natural);
    let list = engine::scl(&LlrKernel, &natural, cfg.frozen(), list_size);
    Ok(strip_crc(
        extract_payload(engine::select(&list, cfg, crc), cfg),
        crc,
    ))
}

pub(crate) fn strip_crc(info: BitBlock, crc: Option<&CrcConfig>) -> BitBlock {
    match crc {
        Some(c) => {
            let mut bits = info.into_vec();
            bits.truncate(bits.len().saturating_sub(c.width() as usize));
            BitBlock::from_bits(bits).expect("bits come from a valid block")
        }
        None => info,
    }
}
