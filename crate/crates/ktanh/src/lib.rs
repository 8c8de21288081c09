//! Integer-only tanh for bfloat16, plus everything needed to judge it.
//!
//! The centerpiece is a table-driven kernel: inputs below 0.25 pass through
//! unchanged (tanh x ≈ x there at bfloat16 precision), inputs above 3.75
//! saturate to ±1, and the band between is handled by 32 parameter triples
//! (E, r, b) — output exponent by lookup, output mantissa as (M >> r) + b.
//! No floating-point arithmetic happens on the hot path.
//!
//! Around the kernel:
//! - [`optimizer`] regenerates the parameter table offline from scratch
//!   (common-exponent projection per interval, then a constrained integer
//!   least-squares search over shift and add).
//! - [`baselines`] holds the competition: piecewise minimax polynomials fit by
//!   Remez exchange, Padé rational approximants solved exactly, and clamped
//!   Taylor polynomials.
//! - [`kernel`] also derives Sigmoid, Swish, and GELU from the tanh core.
//! - [`evaluate`] / [`bench`] sweep every bfloat16 pattern for accuracy and
//!   time the contenders; [`approximator`] is the registry the harness and the
//!   CLI drive everything through.

pub mod approximator;
pub mod baselines;
pub mod bench;
pub mod bf16;
pub mod evaluate;
pub mod kernel;
pub mod optimizer;
pub mod oracle;
pub mod table;

pub use approximator::{build, known_ids, Approximator, BuildContext};
pub use bf16::Bf16;
pub use table::{ParamTable, TableError};
