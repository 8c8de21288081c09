//! Padé rational approximants of tanh, solved exactly in rational arithmetic.
//!
//! tanh is odd, so a [p/q] approximant with odd p and even q reduces to
//! x·N(x²)/D(x²): substituting u = x² halves the linear system and keeps it
//! well conditioned. The system matches the Maclaurin series of
//! g(u) = tanh(√u)/√u through order p+q, solved over BigRational so the
//! coefficients are exact fractions; f64 copies are cached for evaluation.

use num::rational::BigRational;
use num::traits::{One, Zero};
use num::BigInt;
use serde::Serialize;

use super::eval_odd_clamped;

#[derive(Debug, thiserror::Error)]
pub enum PadeError {
    #[error("tanh is odd: need odd numerator degree and even denominator degree, got [{0}/{1}]")]
    UnsupportedShape(usize, usize),
}

/// A [p/q] Padé approximant of tanh in the reduced odd form x·N(x²)/D(x²).
#[derive(Clone, Debug, Serialize)]
pub struct PadeRational {
    pub p: usize,
    pub q: usize,
    /// Exact coefficients of N(u), ascending; num_u[0] == 1.
    #[serde(skip)]
    pub num_u: Vec<BigRational>,
    /// Exact coefficients of D(u), ascending; den_u[0] == 1.
    #[serde(skip)]
    pub den_u: Vec<BigRational>,
    /// f64 copies of num_u / den_u used by eval.
    pub num_f: Vec<f64>,
    pub den_f: Vec<f64>,
    pub x_sat: f64,
}

/// Maclaurin coefficients c_0..c_n of tanh (c_0 = 0, c_1 = 1, even ones 0),
/// from tanh' = 1 − tanh²: (n+1)·c_{n+1} = [n = 0] − Σ_{i+j=n} c_i c_j.
pub fn tanh_maclaurin(n: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); n + 1];
    for k in 0..n {
        let mut conv = BigRational::zero();
        for i in 0..=k {
            conv += &c[i] * &c[k - i];
        }
        let mut next = -conv;
        if k == 0 {
            next += BigRational::one();
        }
        c[k + 1] = next / BigRational::from(BigInt::from(k as i64 + 1));
    }
    c
}

/// Fit the [p/q] approximant. Matches tanh through x^(p+q) — and, by oddness,
/// through x^(p+q+1).
pub fn fit_pade(p: usize, q: usize) -> Result<PadeRational, PadeError> {
    if p % 2 == 0 || q % 2 == 1 {
        return Err(PadeError::UnsupportedShape(p, q));
    }
    let np = (p - 1) / 2; // deg N in u
    let nq = q / 2; // deg D in u
    let tanh_c = tanh_maclaurin(p + q + 1);
    // g(u) = tanh(√u)/√u = Σ g_k u^k with g_k = c_{2k+1}
    let g: Vec<BigRational> = (0..=np + nq).map(|k| tanh_c[2 * k + 1].clone()).collect();

    // Padé conditions for g: N(u) − D(u)·G(u) = O(u^{np+nq+1}), with d_0 = 1.
    // Orders np+1..np+nq give nq equations in the unknown d_1..d_nq:
    //   Σ_{j=1..nq} d_j · g_{k−j} = −g_k      for k = np+1 .. np+nq
    let mut m: Vec<Vec<BigRational>> = Vec::with_capacity(nq);
    for k in np + 1..=np + nq {
        let mut row: Vec<BigRational> = (1..=nq)
            .map(|j| {
                if j <= k {
                    g[k - j].clone()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        row.push(-g[k].clone());
        m.push(row);
    }
    let d_tail = rational_gauss(&mut m);
    let mut den_u = vec![BigRational::one()];
    den_u.extend(d_tail);

    // n_k = Σ_{j=0..k} d_j g_{k−j} for k = 0..np
    let num_u: Vec<BigRational> = (0..=np)
        .map(|k| {
            let mut s = BigRational::zero();
            for j in 0..=k.min(nq) {
                s += &den_u[j] * &g[k - j];
            }
            s
        })
        .collect();

    let to_f = |v: &[BigRational]| -> Vec<f64> {
        v.iter()
            .map(|r| {
                // BigRational has no direct to_f64 for huge terms; go via strings of
                // numer/denom — both fit f64 comfortably for these small orders
                let n: f64 = r.numer().to_string().parse().unwrap();
                let d: f64 = r.denom().to_string().parse().unwrap();
                n / d
            })
            .collect()
    };
    let (num_f, den_f) = (to_f(&num_u), to_f(&den_u));
    Ok(PadeRational { p, q, num_u, den_u, num_f, den_f, x_sat: 4.0 })
}

impl PadeRational {
    pub fn eval_f64(&self, x: f64) -> f64 {
        eval_odd_clamped(x, self.x_sat, |ax| {
            let u = ax * ax;
            ax * super::horner(&self.num_f, u) / super::horner(&self.den_f, u)
        })
    }

    /// The approximant's own Maclaurin expansion (of x·N(x²)/D(x²)) through
    /// x^n, by exact series division.
    pub fn series(&self, n: usize) -> Vec<BigRational> {
        let nu = n / 2;
        // e(u) = N(u)/D(u) through u^nu: e_k = (n_k − Σ_{j≥1} d_j e_{k−j}) / d_0
        let mut e = Vec::with_capacity(nu + 1);
        for k in 0..=nu {
            let mut s = if k < self.num_u.len() {
                self.num_u[k].clone()
            } else {
                BigRational::zero()
            };
            for j in 1..=k.min(self.den_u.len() - 1) {
                let t = &self.den_u[j] * &e[k - j];
                s -= t;
            }
            e.push(s / &self.den_u[0]);
        }
        let mut out = vec![BigRational::zero(); n + 1];
        for (k, ek) in e.into_iter().enumerate() {
            if 2 * k + 1 <= n {
                out[2 * k + 1] = ek;
            }
        }
        out
    }
}

/// Exact Gaussian elimination over BigRational on an n×(n+1) augmented matrix.
fn rational_gauss(m: &mut [Vec<BigRational>]) -> Vec<BigRational> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("Padé system is nonsingular for tanh");
        m.swap(col, pivot);
        for row in 0..n {
            if row != col && !m[row][col].is_zero() {
                let f = &m[row][col] / &m[col][col];
                for k in col..=n {
                    let t = &f * &m[col][k];
                    m[row][k] -= t;
                }
            }
        }
    }
    (0..n).map(|i| &m[i][n] / &m[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bf16::{finite_patterns, Bf16};
    use crate::oracle::tanh_oracle;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn maclaurin_series_is_exact() {
        let c = tanh_maclaurin(15);
        assert_eq!(c[0], BigRational::zero());
        assert_eq!(c[1], BigRational::one());
        assert_eq!(c[3], frac(-1, 3));
        assert_eq!(c[5], frac(2, 15));
        assert_eq!(c[7], frac(-17, 315));
        assert_eq!(c[9], frac(62, 2835));
        assert_eq!(c[11], frac(-1382, 155925));
        assert_eq!(c[13], frac(21844, 6081075));
        assert_eq!(c[15], frac(-929569, 638512875));
        for k in (0..=14).step_by(2) {
            assert!(c[k].is_zero(), "even coefficient c_{k} must vanish");
        }
    }

    #[test]
    fn rejects_shapes_that_break_oddness() {
        assert!(matches!(fit_pade(2, 2), Err(PadeError::UnsupportedShape(2, 2))));
        assert!(matches!(fit_pade(3, 3), Err(PadeError::UnsupportedShape(3, 3))));
    }

    #[test]
    fn pade_3_2_has_the_textbook_coefficients() {
        // tanh(x) ≈ x(1 + x²/15) / (1 + 2x²/5)
        let p = fit_pade(3, 2).unwrap();
        assert_eq!(p.num_u, vec![BigRational::one(), frac(1, 15)]);
        assert_eq!(p.den_u, vec![BigRational::one(), frac(2, 5)]);
    }

    #[test]
    fn pade_7_8_coefficients_are_the_exact_fractions() {
        let p = fit_pade(7, 8).unwrap();
        assert_eq!(
            p.num_u,
            vec![BigRational::one(), frac(2, 15), frac(2, 585), frac(4, 225225)]
        );
        assert_eq!(
            p.den_u,
            vec![
                BigRational::one(),
                frac(7, 15),
                frac(1, 39),
                frac(2, 6435),
                frac(1, 2027025),
            ]
        );
    }

    #[test]
    fn series_matches_tanh_through_the_contact_order() {
        for (p, q) in [(3usize, 2usize), (7, 8)] {
            let pad = fit_pade(p, q).unwrap();
            let order = p + q + 1; // oddness buys one extra order
            let own = pad.series(order);
            let tanh_c = tanh_maclaurin(order);
            for k in 0..=order {
                assert_eq!(own[k], tanh_c[k], "[{p}/{q}] series term x^{k}");
            }
        }
    }

    #[test]
    fn truncation_error_scales_like_the_next_power() {
        // near zero the defect is O(x^{p+q+2}); checking against 2·x^{p+q+1}
        // with an absolute floor of 1e-17 keeps the bound meaningful where the
        // [7/8] defect sinks below f64 noise
        for (p, q) in [(3usize, 2usize), (7, 8)] {
            let pad = fit_pade(p, q).unwrap();
            for x in [1e-2f64, 1e-3] {
                let diff = (pad.eval_f64(x) - tanh_oracle(x)).abs();
                let bound = 2.0 * x.powi((p + q + 1) as i32) + 1e-17;
                assert!(
                    diff <= bound,
                    "[{p}/{q}] at x={x}: diff {diff:e} > bound {bound:e}"
                );
            }
        }
    }

    #[test]
    fn sweep_errors_match_the_frozen_levels() {
        let sweep = |pad: &PadeRational| {
            let mut max = 0.0f64;
            for b in finite_patterns() {
                let x = b.decode();
                let err = (Bf16::encode(pad.eval_f64(x)).decode() - tanh_oracle(x)).abs();
                max = max.max(err);
            }
            max
        };
        let e32 = sweep(&fit_pade(3, 2).unwrap());
        let e78 = sweep(&fit_pade(7, 8).unwrap());
        assert!((e32 - 0.0200271).abs() < 1e-6, "[3/2] sweep err {e32}");
        assert!((e78 - 0.0019395).abs() < 1e-6, "[7/8] sweep err {e78}");
        assert!(e78 <= e32 / 10.0, "[7/8] should be an order of magnitude tighter");
    }

    #[test]
    fn saturation_and_oddness_hold() {
        let p = fit_pade(7, 8).unwrap();
        // the raw rational decays back toward 0 past its useful range; the
        // saturation clamp is what keeps large inputs at ±1
        assert_eq!(p.eval_f64(40.0), 1.0);
        assert_eq!(p.eval_f64(-40.0), -1.0);
        for x in [0.1, 0.9, 2.5, 3.999] {
            assert_eq!(p.eval_f64(-x), -p.eval_f64(x));
        }
    }
}
