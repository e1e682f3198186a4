//! Polar code construction, encoding and CRC handling.
//!
//! Encoding follows `x = F^{⊗n} B u` with `F = [[1, 1], [0, 1]]` and `B` the
//! bit-reversal permutation. The Kronecker power is applied by the usual
//! in-place butterfly; the permutation is applied to its output (the two
//! commute).

mod crc;
mod nr5g;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use self::crc::{crc_attach, crc_check, CrcConfig};

/// Largest block length covered by the embedded 5G reliability sequence.
pub const NR5G_MAX_LEN: usize = 1024;

/// A vector of bits stored one per byte.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitBlock(Vec<u8>);

impl BitBlock {
    pub fn zeros(len: usize) -> Self {
        BitBlock(vec![0; len])
    }

    /// Builds a block, rejecting any element outside `{0, 1}`.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "bit {pos} has value {}",
                bits[pos]
            )));
        }
        Ok(BitBlock(bits))
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        BitBlock(bits.into_iter().map(u8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        check_len(other.len(), self.len())?;
        Ok(BitBlock(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }
}

impl std::ops::Index<usize> for BitBlock {
    type Output = u8;

    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

/// How the information set is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Construction {
    /// Standardized 5G NR reliability order (`N ≤ 1024`).
    Nr5g,
    /// Bhattacharyya-parameter recursion started from the erasure proxy `z0`.
    Bhattacharyya { z0: f64 },
}

/// Block length, information set and the (all-zero) frozen set of a code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeConfig {
    depth: u32,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
}

impl CodeConfig {
    /// Creates a code of length `2^depth` carrying data on `info_set`.
    pub fn new(depth: u32, info_set: Vec<usize>) -> Result<Self> {
        if depth > 24 {
            return Err(Error::InvalidCode(format!("depth {depth} is too large")));
        }
        let len = 1usize << depth;
        if info_set.is_empty() || info_set.len() > len {
            return Err(Error::InvalidCode(format!(
                "need 0 < K <= N, got K = {} for N = {len}",
                info_set.len()
            )));
        }
        if info_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCode(
                "information set must be strictly increasing".into(),
            ));
        }
        if info_set.last().is_some_and(|&i| i >= len) {
            return Err(Error::InvalidCode(format!(
                "information index out of range for N = {len}"
            )));
        }
        let mut frozen = vec![true; len];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(CodeConfig {
            depth,
            info_set,
            frozen,
        })
    }

    /// Builds a code of length `len` with `k` information positions chosen
    /// by `method`.
    pub fn construct(len: usize, k: usize, method: Construction) -> Result<Self> {
        let depth = log2_exact(len)?;
        let info_set = construct_information_set(len, k, method)?;
        CodeConfig::new(depth, info_set)
    }

    /// Tree depth `n`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Block length `N = 2^n`.
    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    /// Number of information positions `|A|`.
    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Frozen mask indexed by `u` position.
    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }
}

pub(crate) fn log2_exact(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidCode(format!(
            "block length {len} is not a power of two >= 2"
        )));
    }
    Ok(len.trailing_zeros())
}

fn check_len(actual: usize, expected: usize) -> Result<()> {
    if actual != expected {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Returns `π` with `π(i)` the `n`-bit reversal of `i`.
pub fn bit_reversal_permutation(n: u32) -> Vec<usize> {
    let len = 1usize << n;
    if n == 0 {
        return vec![0];
    }
    (0..len)
        .map(|i| i.reverse_bits() >> (usize::BITS - n))
        .collect()
}

/// Applies `F^{⊗n}` in place over GF(2). The transform is its own inverse.
pub fn polar_transform_in_place(bits: &mut [u8]) {
    debug_assert!(bits.len().is_power_of_two());
    let len = bits.len();
    let mut step = 1;
    while step < len {
        for block in bits.chunks_mut(2 * step) {
            let (top, bottom) = block.split_at_mut(step);
            for (t, b) in top.iter_mut().zip(bottom.iter()) {
                *t ^= *b;
            }
        }
        step *= 2;
    }
}

/// Computes `x = F^{⊗n} B u`.
pub fn polar_encode(u: &BitBlock, cfg: &CodeConfig) -> Result<BitBlock> {
    check_len(u.len(), cfg.len())?;
    let mut v = u.0.clone();
    polar_transform_in_place(&mut v);
    let perm = bit_reversal_permutation(cfg.depth());
    Ok(BitBlock(perm.iter().map(|&p| v[p]).collect()))
}

/// Scatters the payload onto the information positions; frozen bits are zero.
pub fn build_message(payload: &BitBlock, cfg: &CodeConfig) -> Result<BitBlock> {
    check_len(payload.len(), cfg.k())?;
    let mut u = vec![0u8; cfg.len()];
    for (&pos, &bit) in cfg.info_set().iter().zip(payload.as_slice()) {
        u[pos] = bit;
    }
    Ok(BitBlock(u))
}

/// Gathers the information positions of `u`.
pub fn extract_payload(u: &[u8], cfg: &CodeConfig) -> BitBlock {
    BitBlock(cfg.info_set().iter().map(|&i| u[i]).collect())
}

/// Returns the `k` most reliable indices of a length-`len` code, ascending.
pub fn construct_information_set(len: usize, k: usize, method: Construction) -> Result<Vec<usize>> {
    let depth = log2_exact(len)?;
    if k == 0 || k > len {
        return Err(Error::InvalidCode(format!(
            "need 0 < K <= N, got K = {k} for N = {len}"
        )));
    }
    let mut set: Vec<usize> = match method {
        Construction::Nr5g => {
            if len > NR5G_MAX_LEN {
                return Err(Error::InvalidCode(format!(
                    "5G construction covers N <= {NR5G_MAX_LEN}, got {len}"
                )));
            }
            let ordered: Vec<usize> = nr5g::NR5G_RELIABILITY
                .iter()
                .map(|&q| q as usize)
                .filter(|&q| q < len)
                .collect();
            ordered[len - k..].to_vec()
        }
        Construction::Bhattacharyya { z0 } => {
            if !(z0 > 0.0 && z0 < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "erasure proxy z0 must lie in (0, 1), got {z0}"
                )));
            }
            let z = bhattacharyya_parameters(depth, z0);
            let mut order: Vec<usize> = (0..len).collect();
            // Ties go to the larger index.
            order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(b.cmp(&a)));
            order.truncate(k);
            order
        }
    };
    set.sort_unstable();
    Ok(set)
}

/// Bit-channel Bhattacharyya parameters in natural `u` order.
pub fn bhattacharyya_parameters(depth: u32, z0: f64) -> Vec<f64> {
    let mut z = vec![z0];
    for _ in 0..depth {
        z = z
            .iter()
            .flat_map(|&zi| [2.0 * zi - zi * zi, zi * zi])
            .collect();
    }
    z
}
