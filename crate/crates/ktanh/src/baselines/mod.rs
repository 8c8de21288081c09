//! Reference approximators the table kernel is compared against: piecewise
//! minimax polynomials, Padé rationals, and Taylor truncations.
//!
//! All of them evaluate in f64 through the same scaffold: odd extension
//! (P is fitted on the positive axis only), a [-1, 1] clamp, and saturation to
//! ±1 beyond `x_sat`. Saturation matters more than it looks: a Padé form with
//! denominator degree above the numerator's decays to zero for large |x|, and a
//! truncated Taylor polynomial runs off to ∓∞, so without a saturation point the
//! exhaustive-sweep error of those forms is catastrophic.

pub mod minimax;
pub mod pade;

use serde::Serialize;

/// Evaluate an odd approximation of tanh: `f` is the positive-axis rule, the
/// result is sign-extended, clamped to [-1, 1], and saturated to ±1 past x_sat.
/// NaN propagates; ±0 and ±Inf keep their signs.
pub(crate) fn eval_odd_clamped(x: f64, x_sat: f64, f: impl Fn(f64) -> f64) -> f64 {
    if x == 0.0 {
        return x; // preserves the sign of ±0
    }
    let ax = x.abs();
    let y = if ax > x_sat { 1.0 } else { f(ax).clamp(-1.0, 1.0) };
    if x < 0.0 {
        -y
    } else {
        y
    }
}

/// Horner evaluation of an ascending coefficient list.
pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Truncated Maclaurin expansion of tanh. "Degree 2" keeps terms through x²
/// (whose coefficient is zero — tanh is odd), i.e. P(x) = x; degree 3 is
/// x - x³/3. Saturates at x_sat = 1, the degree-3 truncation's first positive
/// stationary point; a bare clamp would let the cubic plunge to -1 for large x.
#[derive(Clone, Debug, Serialize)]
pub struct TaylorPoly {
    pub degree: usize,
    /// Ascending coefficients, constant term first.
    pub coeffs: Vec<f64>,
    pub x_sat: f64,
}

impl TaylorPoly {
    pub fn new(degree: usize) -> TaylorPoly {
        assert!(degree == 2 || degree == 3, "supported Taylor degrees are 2 and 3");
        let mut coeffs = vec![0.0, 1.0, 0.0];
        if degree == 3 {
            coeffs.push(-1.0 / 3.0);
        }
        TaylorPoly { degree, coeffs, x_sat: 1.0 }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        eval_odd_clamped(x, self.x_sat, |ax| horner(&self.coeffs, ax))
    }
}

/// Serialization wrapper for any fitted baseline: a type tag plus the fields
/// that reproduce its sweep behavior.
#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaselineSpec<'a> {
    Minimax(&'a minimax::PiecewisePoly),
    Pade(&'a pade::PadeRational),
    Taylor(&'a TaylorPoly),
}

impl BaselineSpec<'_> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("baseline serializes")
    }
}
