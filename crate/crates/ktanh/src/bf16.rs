//! BFloat16 (1 sign / 8 exponent / 7 mantissa) storage type and exact conversions.
//!
//! `Bf16` is a plain bit-pattern newtype: all kernel arithmetic in this crate works
//! on the raw fields, so the codec here only has to promise two things:
//!
//! * `decode` is exact — every pattern (subnormals included) maps to the real value
//!   it denotes, with E=255 giving ±Inf / NaN,
//! * `encode` rounds an `f64` to the *nearest* bfloat16, ties to even.
//!
//! Encode deliberately does not round through `f32`: a double rounding
//! f64 → f32 → bf16 mis-rounds values that sit between a bf16 rounding midpoint and
//! the f32 value that midpoint rounds to. The implementation rounds the f64
//! significand straight to 8 bits instead.

/// A bfloat16 value as its raw 16-bit pattern.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Bf16(pub u16);

/// Canonical quiet NaN produced by `encode` for any NaN input.
pub const NAN_BITS: u16 = 0x7FC0;

impl Bf16 {
    pub const fn from_bits(bits: u16) -> Self {
        Bf16(bits)
    }

    pub const fn to_bits(self) -> u16 {
        self.0
    }

    /// Sign bit (0 or 1).
    pub const fn sign(self) -> u16 {
        self.0 >> 15
    }

    /// Biased exponent field, 0..=255.
    pub const fn exponent(self) -> u16 {
        (self.0 >> 7) & 0xFF
    }

    /// Mantissa field, 0..=127.
    pub const fn mantissa(self) -> u16 {
        self.0 & 0x7F
    }

    /// Magnitude pattern (sign bit cleared). For finite values this orders
    /// identically to |value|, which is what the kernel's threshold compares use.
    pub const fn magnitude_bits(self) -> u16 {
        self.0 & 0x7FFF
    }

    pub const fn is_nan(self) -> bool {
        self.exponent() == 255 && self.mantissa() != 0
    }

    pub const fn is_infinite(self) -> bool {
        self.exponent() == 255 && self.mantissa() == 0
    }

    pub const fn is_finite(self) -> bool {
        self.exponent() != 255
    }

    /// Exact real value of the pattern. Widening bf16 → f32 is a pure bit shift
    /// (same exponent range, mantissa zero-extended) and f32 → f64 is lossless,
    /// so this decodes every pattern exactly, subnormals included.
    pub fn decode(self) -> f64 {
        f32::from_bits((self.0 as u32) << 16) as f64
    }

    /// Nearest bfloat16 to `x`, ties to even. NaN encodes to the canonical quiet
    /// NaN pattern; overflow goes to ±Inf per IEEE round-to-nearest.
    pub fn encode(x: f64) -> Self {
        Bf16(encode_bits(x))
    }
}

impl std::fmt::Display for Bf16 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.decode())
    }
}

/// Round `v` right by `shift` bits, nearest-even. `shift` must be in 1..=63.
fn rne_shift(v: u64, shift: u32) -> u64 {
    let keep = v >> shift;
    let rem = v & ((1u64 << shift) - 1);
    let half = 1u64 << (shift - 1);
    if rem > half || (rem == half && keep & 1 == 1) {
        keep + 1
    } else {
        keep
    }
}

fn encode_bits(x: f64) -> u16 {
    let bits = x.to_bits();
    let sign = ((bits >> 63) as u16) << 15;
    let e64 = ((bits >> 52) & 0x7FF) as i64;
    let m64 = bits & ((1u64 << 52) - 1);

    if e64 == 0x7FF {
        return if m64 != 0 { NAN_BITS } else { sign | 0x7F80 };
    }
    if e64 == 0 {
        // f64 subnormal: |x| < 2^-1022, far below half the smallest bf16
        // subnormal (2^-134), so it rounds to zero.
        return sign;
    }

    let mut ebf = e64 - 1023 + 127;
    let mant = (1u64 << 52) | m64; // full 53-bit significand

    if ebf >= 1 {
        // Normal range: round 53 significand bits down to 8 (1 hidden + 7 stored).
        let mut rounded = rne_shift(mant, 45);
        if rounded == 0x100 {
            // Rounded up across a binade (e.g. 1.9999 → 2.0).
            rounded = 0x80;
            ebf += 1;
        }
        if ebf >= 255 {
            return sign | 0x7F80;
        }
        sign | ((ebf as u16) << 7) | (rounded as u16 & 0x7F)
    } else {
        // Below 2^-126: round to a multiple of the bf16 subnormal quantum 2^-133.
        // Shifting the 53-bit significand by 45 + (1 - ebf) expresses the value in
        // quanta; a result of 0x80 lands exactly on 2^-126, which is the adjacent
        // normal pattern — the bit arithmetic below is monotone across that edge.
        let shift = 45 + (1 - ebf) as u32;
        if shift > 63 {
            return sign; // underflows to zero even after rounding
        }
        sign | rne_shift(mant, shift) as u16
    }
}

/// All finite non-NaN patterns, ascending bit order (not value order).
pub fn finite_patterns() -> impl Iterator<Item = Bf16> {
    (0u16..=u16::MAX)
        .map(Bf16)
        .filter(|b| b.is_finite())
}
