//! Double-precision reference functions every approximator is measured against.
//!
//! `tanh_oracle` computes through `|x|` and restores the sign, so the reference is
//! odd *bit-exactly* — libm implementations don't all guarantee that, and the odd
//! symmetry acceptance checks need it to hold for every decodable input.

use statrs::function::erf::erf;

pub const GELU_TANH_COEFF: f64 = 0.044715;

/// tanh with exact odd symmetry: tanh_oracle(-x) == -tanh_oracle(x) for all x.
pub fn tanh_oracle(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let t = x.abs().tanh();
    if x.is_sign_negative() {
        -t
    } else {
        t
    }
}

/// Logistic sigmoid via the tanh identity (1 + tanh(x/2)) / 2.
pub fn sigmoid_oracle(x: f64) -> f64 {
    0.5 * (1.0 + tanh_oracle(x * 0.5))
}

/// Swish: x * sigmoid(x).
pub fn swish_oracle(x: f64) -> f64 {
    x * sigmoid_oracle(x)
}

/// Exact GELU: x * Φ(x), Gaussian CDF via erf.
pub fn gelu_oracle(x: f64) -> f64 {
    x * 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// The tanh-form GELU approximation: 0.5 x (1 + tanh(√(2/π)(x + a x³))).
/// This is the analytic form itself at full precision, before any table kernel
/// is substituted for the inner tanh.
pub fn gelu_tanh_form(x: f64) -> f64 {
    0.5 * x * (1.0 + tanh_oracle(gelu_inner_arg(x)))
}

/// Argument fed to tanh inside the GELU form: √(2/π)(x + a x³).
pub fn gelu_inner_arg(x: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * (x + GELU_TANH_COEFF * x * x * x)
}
