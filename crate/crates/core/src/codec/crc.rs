use crate::codec::BitBlock;
use crate::{Error, Result};

/// A non-reflected CRC processed MSB first, without output XOR.
///
/// `poly` holds the generator without its implicit leading coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrcConfig {
    width: u32,
    poly: u64,
    init: u64,
}

impl CrcConfig {
    pub fn new(width: u32, poly: u64, init: u64) -> Result<Self> {
        if width == 0 || width > 63 {
            return Err(Error::InvalidParameter(format!(
                "CRC width must be in 1..=63, got {width}"
            )));
        }
        let mask = (1u64 << width) - 1;
        if poly & !mask != 0 || init & !mask != 0 {
            return Err(Error::InvalidParameter(format!(
                "CRC polynomial/init exceed {width} bits"
            )));
        }
        if poly & 1 == 0 {
            return Err(Error::InvalidParameter(
                "CRC polynomial must have a non-zero constant term".into(),
            ));
        }
        Ok(CrcConfig { width, poly, init })
    }

    /// CRC-16-CCITT: `x^16 + x^12 + x^5 + 1`, zero preset.
    pub fn ccitt16() -> Self {
        CrcConfig {
            width: 16,
            poly: 0x1021,
            init: 0,
        }
    }

    /// Number of checksum bits `N_CRC`.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn poly(&self) -> u64 {
        self.poly
    }

    pub fn init(&self) -> u64 {
        self.init
    }

    /// Shift-register remainder of `bits`.
    pub fn remainder(&self, bits: &[u8]) -> u64 {
        let mask = (1u64 << self.width) - 1;
        let top = self.width - 1;
        let mut reg = self.init;
        for &b in bits {
            let feedback = ((reg >> top) & 1) ^ u64::from(b & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.poly;
            }
        }
        reg
    }

    fn remainder_bits(&self, bits: &[u8]) -> impl Iterator<Item = u8> {
        let r = self.remainder(bits);
        (0..self.width).rev().map(move |i| ((r >> i) & 1) as u8)
    }

    /// Checks a slice laid out as payload followed by `width` checksum bits.
    pub fn check_slice(&self, block: &[u8]) -> bool {
        let w = self.width as usize;
        if block.len() <= w {
            return false;
        }
        let (payload, tail) = block.split_at(block.len() - w);
        self.remainder_bits(payload).eq(tail.iter().copied())
    }
}

/// Appends the checksum of `payload`.
pub fn crc_attach(payload: &BitBlock, crc: &CrcConfig) -> BitBlock {
    let mut bits = payload.as_slice().to_vec();
    bits.extend(crc.remainder_bits(payload.as_slice()));
    BitBlock(bits)
}

/// True when the trailing `N_CRC` bits match the checksum of the rest.
pub fn crc_check(block: &BitBlock, crc: &CrcConfig) -> bool {
    crc.check_slice(block.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Schoolbook GF(2) division of `payload · x^w` by the full generator.
    fn long_division(payload: &[u8], crc: &CrcConfig) -> Vec<u8> {
        let w = crc.width() as usize;
        let mut generator = vec![1u8];
        generator.extend((0..w).rev().map(|i| ((crc.poly() >> i) & 1) as u8));
        let mut dividend = payload.to_vec();
        dividend.extend(std::iter::repeat_n(0, w));
        for i in 0..payload.len() {
            if dividend[i] == 1 {
                for (d, g) in dividend[i..].iter_mut().zip(&generator) {
                    *d ^= g;
                }
            }
        }
        dividend[payload.len()..].to_vec()
    }

    #[test]
    fn zero_payload_has_zero_crc() {
        let crc = CrcConfig::ccitt16();
        let block = crc_attach(&BitBlock::zeros(40), &crc);
        assert!(block.as_slice().iter().all(|&b| b == 0));
        assert!(crc_check(&block, &crc));
    }

    #[test]
    fn degree_one_crc_is_parity() {
        let crc = CrcConfig::new(1, 1, 0).unwrap();
        let block = crc_attach(&BitBlock::from_bits(vec![1]).unwrap(), &crc);
        assert_eq!(block.as_slice(), &[1, 1]);
        let block = crc_attach(&BitBlock::from_bits(vec![1, 0, 1, 1]).unwrap(), &crc);
        assert_eq!(block.as_slice()[4], 1);
    }

    #[test]
    fn ccitt_matches_long_division_on_fixed_pattern() {
        let crc = CrcConfig::ccitt16();
        let pattern: u32 = 0xDEAD_BEEF;
        let payload: Vec<u8> = (0..32).rev().map(|i| ((pattern >> i) & 1) as u8).collect();
        let expected = long_division(&payload, &crc);
        let block = crc_attach(&BitBlock::from_bits(payload.clone()).unwrap(), &crc);
        assert_eq!(&block.as_slice()[32..], expected.as_slice());
        // Byte-wise CRC-16/XMODEM of DE AD BE EF.
        assert_eq!(crc.remainder(&payload), 0xC457);
    }

    #[test]
    fn detects_every_single_bit_error() {
        let crc = CrcConfig::ccitt16();
        for len in [1usize, 7, 33, 100] {
            let payload: Vec<u8> = (0..len).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
            let block = crc_attach(&BitBlock::from_bits(payload).unwrap(), &crc);
            assert!(crc_check(&block, &crc));
            for pos in 0..block.len() {
                let mut bits = block.as_slice().to_vec();
                bits[pos] ^= 1;
                assert!(
                    !crc_check(&BitBlock::from_bits(bits).unwrap(), &crc),
                    "len {len} pos {pos}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(CrcConfig::new(0, 1, 0).is_err());
        assert!(CrcConfig::new(8, 0x1ff, 0).is_err());
        assert!(CrcConfig::new(8, 0x06, 0).is_err());
    }
}
