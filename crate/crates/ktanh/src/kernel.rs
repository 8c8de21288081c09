//! The integer tanh kernel and the activations derived from it.
//!
//! Three paths, selected by comparing the input's magnitude bits against the two
//! thresholds (both comparisons strict, so inputs exactly at a threshold take the
//! table path):
//!
//! * |x| < 0.25 — bypass: the input bits come back unchanged (tanh x ≈ x there),
//! * |x| > 3.75 — saturate: ±1.0 with the input's sign (covers ±Inf),
//! * otherwise — table: the 5-bit index picks (E, r, b) and the output is
//!   `(sign, E, (M >> r) + b)`. No float arithmetic touches this path.
//!
//! NaN is checked first and passed through bit-identically, which also makes the
//! odd-symmetry property hold for every one of the 65,536 patterns.

use crate::bf16::Bf16;
use crate::oracle;
use crate::table::ParamTable;

/// Table index for an input on the table path: two exponent LSBs as the high
/// bits, three mantissa MSBs as the low bits.
pub fn index_of(x: Bf16) -> usize {
    (((x.exponent() & 0b11) << 3) | (x.mantissa() >> 4)) as usize
}

/// The kernel. Total over all bit patterns; see the module docs for the paths.
pub fn ktanh_eval(x: Bf16, table: &ParamTable) -> Bf16 {
    if x.is_nan() {
        return x;
    }
    let sign = x.to_bits() & 0x8000;
    let mag = x.magnitude_bits();
    if mag < table.t1_bits {
        return x;
    }
    if mag > table.t2_bits {
        return Bf16(sign | (127 << 7)); // ±1.0
    }
    let t = index_of(x);
    // Signed add is safe without clamping: table validation proved every
    // reachable mantissa lands in [0, 127].
    let m_out = ((x.mantissa() >> table.r[t]) as i16 + table.b[t]) as u16;
    Bf16(sign | ((table.e[t] as u16) << 7) | m_out)
}

/// Sigmoid through the tanh identity (1 + tanh(x/2)) / 2. The argument halving
/// and the outer affine step run in f64; only the tanh core is the table kernel.
pub fn ksigmoid_eval(x: Bf16, table: &ParamTable) -> Bf16 {
    let t = ktanh_eval(Bf16::encode(x.decode() * 0.5), table);
    Bf16::encode(0.5 * (1.0 + t.decode()))
}

/// Swish: x * sigmoid(x), sigmoid via the kernel as in `ksigmoid_eval`.
pub fn kswish_eval(x: Bf16, table: &ParamTable) -> Bf16 {
    let xf = x.decode();
    let t = ktanh_eval(Bf16::encode(xf * 0.5), table);
    Bf16::encode(xf * 0.5 * (1.0 + t.decode()))
}

/// GELU in its tanh form, with the inner tanh replaced by the table kernel:
/// 0.5 x (1 + ktanh(√(2/π)(x + 0.044715 x³))).
pub fn kgelu_eval(x: Bf16, table: &ParamTable) -> Bf16 {
    let xf = x.decode();
    let t = ktanh_eval(Bf16::encode(oracle::gelu_inner_arg(xf)), table);
    Bf16::encode(0.5 * xf * (1.0 + t.decode()))
}
