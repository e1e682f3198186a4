//! Sign-magnitude and two's-complement words of a fixed width, and the two
//! pairs of conversions between them.

/// `width`-bit sign-magnitude word: sign in the MSB, magnitude below it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignMagnitude {
    bits: u32,
    width: u32,
}

/// `width`-bit two's-complement word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwosComplement {
    bits: u32,
    width: u32,
}

fn word_mask(width: u32) -> u32 {
    assert!((2..=31).contains(&width), "word width {width} out of range");
    (1 << width) - 1
}

fn magnitude_mask(width: u32) -> u32 {
    (1 << (width - 1)) - 1
}

impl SignMagnitude {
    pub fn from_bits(bits: u32, width: u32) -> Self {
        SignMagnitude {
            bits: bits & word_mask(width),
            width,
        }
    }

    /// `negative` selects the sign bit; a zero magnitude with the sign set is `−0`.
    pub fn from_parts(negative: bool, magnitude: u32, width: u32) -> Self {
        let mask = magnitude_mask(width);
        assert!(
            magnitude <= mask,
            "magnitude {magnitude} does not fit {width} bits"
        );
        SignMagnitude::from_bits((u32::from(negative) << (width - 1)) | magnitude, width)
    }

    pub fn from_value(value: i32, width: u32) -> Self {
        SignMagnitude::from_parts(value < 0, value.unsigned_abs(), width)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn is_negative(self) -> bool {
        self.bits >> (self.width - 1) == 1
    }

    pub fn magnitude(self) -> u32 {
        self.bits & magnitude_mask(self.width)
    }

    pub fn value(self) -> i32 {
        let m = self.magnitude() as i32;
        if self.is_negative() {
            -m
        } else {
            m
        }
    }
}

impl TwosComplement {
    pub fn from_bits(bits: u32, width: u32) -> Self {
        TwosComplement {
            bits: bits & word_mask(width),
            width,
        }
    }

    pub fn from_value(value: i32, width: u32) -> Self {
        TwosComplement::from_bits(value as u32, width)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn is_negative(self) -> bool {
        self.bits >> (self.width - 1) == 1
    }

    pub fn value(self) -> i32 {
        if self.is_negative() {
            self.bits as i32 - (1 << self.width)
        } else {
            self.bits as i32
        }
    }

    /// Same value in a wider word.
    pub fn sign_extend(self, width: u32) -> Self {
        assert!(width >= self.width);
        let ext = if self.is_negative() {
            word_mask(width) & !word_mask(self.width)
        } else {
            0
        };
        TwosComplement::from_bits(self.bits | ext, width)
    }

    /// Sum modulo `2^width`.
    pub fn wrapping_add(self, other: Self) -> Self {
        assert_eq!(self.width, other.width);
        TwosComplement::from_bits(self.bits.wrapping_add(other.bits), self.width)
    }
}

/// Exact conversion: invert the magnitude of negative words, then add one
/// with carry through the whole word.
pub fn sm_to_twos_accurate(a: SignMagnitude) -> TwosComplement {
    let s = u32::from(a.is_negative());
    let inverted = (s << (a.width - 1)) | (a.magnitude() ^ (magnitude_mask(a.width) * s));
    TwosComplement::from_bits(inverted.wrapping_add(s), a.width)
}

/// Exact conversion back. The most negative word has no sign-magnitude
/// counterpart; it saturates to `−(2^(width−1) − 1)` and the flag is set.
pub fn twos_to_sm_accurate(b: TwosComplement) -> (SignMagnitude, bool) {
    let mask = magnitude_mask(b.width);
    let s = u32::from(b.is_negative());
    let low = b.bits & mask;
    if s == 1 && low == 0 {
        return (SignMagnitude::from_parts(true, mask, b.width), true);
    }
    let magnitude = (low.wrapping_add(mask * s) & mask) ^ (mask * s);
    (SignMagnitude::from_parts(s == 1, magnitude, b.width), false)
}

/// Carry-free conversion `[a₀, |a| ⊕ a₀]`; negative values move down by one.
pub fn sm_to_twos_simplified(a: SignMagnitude) -> TwosComplement {
    let s = u32::from(a.is_negative());
    TwosComplement::from_bits(a.bits ^ (magnitude_mask(a.width) * s), a.width)
}

/// Carry-free conversion `[b₀, |b| ⊕ b₀]`; negative values move up by one.
pub fn twos_to_sm_simplified(b: TwosComplement) -> SignMagnitude {
    let s = u32::from(b.is_negative());
    SignMagnitude::from_bits(b.bits ^ (magnitude_mask(b.width) * s), b.width)
}
