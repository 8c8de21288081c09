//! Piecewise minimax (Chebyshev) polynomial fit of tanh via Remez exchange.
//!
//! Each piece solves the classic alternation system — degree+2 reference points,
//! unknown coefficients plus the signed error E — then relocates the references
//! to the extrema of the residual on a dense grid and repeats until the
//! references stop moving. Optimality shows up as equioscillation: degree+2
//! residual extrema of (nearly) equal magnitude and alternating sign, which the
//! fit verifies and reports.
//!
//! Coefficients are stored in the local variable u = x − piece_start; powers of
//! u stay small across every piece, keeping the alternation system well
//! conditioned even for pieces far from the origin.

use serde::Serialize;

use super::{eval_odd_clamped, horner};
use crate::oracle::tanh_oracle;

const GRID_POINTS: usize = 10_001;
const MAX_EXCHANGES: usize = 60;

#[derive(Debug, thiserror::Error)]
pub enum MinimaxError {
    #[error("supported minimax degrees are 2 and 3, got {0}")]
    Degree(usize),
    #[error("need at least one piece, got {0}")]
    Pieces(usize),
    #[error("saturation point must be positive, got {0}")]
    Saturation(f64),
}

/// A fitted piecewise polynomial over [0, x_sat], evaluated by odd extension
/// and saturated to ±1 beyond x_sat.
#[derive(Clone, Debug, Serialize)]
pub struct PiecewisePoly {
    /// pieces+1 ascending breakpoints spanning [0, x_sat].
    pub breakpoints: Vec<f64>,
    /// Per-piece ascending coefficients in u = x − piece_start.
    pub coeffs: Vec<Vec<f64>>,
    pub x_sat: f64,
}

/// Fit diagnostics for one piece.
#[derive(Clone, Debug)]
pub struct PieceStats {
    /// Residual extrema (x, tanh(x) − P(x)) certifying the fit, degree+2 of them.
    pub extrema: Vec<(f64, f64)>,
    /// Largest |residual| on the verification grid.
    pub max_err: f64,
    /// (max − min) / max over the extrema magnitudes; 0 is perfect equioscillation.
    pub spread: f64,
    /// True when the exchange hit the iteration cap and the best grid-minimax
    /// iterate was kept instead of a fixed point.
    pub fell_back: bool,
}

pub struct MinimaxFit {
    pub poly: PiecewisePoly,
    pub pieces: Vec<PieceStats>,
}

impl PiecewisePoly {
    pub fn eval_f64(&self, x: f64) -> f64 {
        eval_odd_clamped(x, self.x_sat, |ax| {
            // 8-ish pieces: a linear scan beats bookkeeping
            let i = self
                .breakpoints
                .windows(2)
                .position(|w| ax <= w[1])
                .unwrap_or(self.coeffs.len() - 1);
            horner(&self.coeffs[i], ax - self.breakpoints[i])
        })
    }
}

/// Fit `pieces` uniform pieces of the given degree over [0, x_sat].
pub fn fit_minimax(degree: usize, pieces: usize, x_sat: f64) -> Result<MinimaxFit, MinimaxError> {
    if !(2..=3).contains(&degree) {
        return Err(MinimaxError::Degree(degree));
    }
    if pieces == 0 {
        return Err(MinimaxError::Pieces(pieces));
    }
    if !(x_sat > 0.0) {
        return Err(MinimaxError::Saturation(x_sat));
    }
    let breakpoints: Vec<f64> = (0..=pieces)
        .map(|i| x_sat * i as f64 / pieces as f64)
        .collect();
    let mut coeffs = Vec::with_capacity(pieces);
    let mut stats = Vec::with_capacity(pieces);
    for w in breakpoints.windows(2) {
        let (c, s) = remez_piece(degree, w[0], w[1]);
        coeffs.push(c);
        stats.push(s);
    }
    Ok(MinimaxFit {
        poly: PiecewisePoly { breakpoints, coeffs, x_sat },
        pieces: stats,
    })
}

/// One Remez exchange on [lo, hi]. Returns ascending coefficients in u = x − lo.
fn remez_piece(degree: usize, lo: f64, hi: f64) -> (Vec<f64>, PieceStats) {
    let n = degree + 2;
    // initial references: Chebyshev points of the interval
    let mut refs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect();

    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None; // (grid max err, coeffs)
    let mut coeffs = Vec::new();
    let mut converged = false;
    for _ in 0..MAX_EXCHANGES {
        coeffs = solve_alternation(degree, lo, &refs);
        let resid: Vec<f64> = grid
            .iter()
            .map(|&x| tanh_oracle(x) - horner(&coeffs, x - lo))
            .collect();
        let max_err = resid.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if best.as_ref().map_or(true, |(b, _)| max_err < *b) {
            best = Some((max_err, coeffs.clone()));
        }
        let new_refs: Vec<f64> = alternating_extrema(&grid, &resid, n)
            .iter()
            .map(|&(x, _)| x)
            .collect();
        if new_refs
            .iter()
            .zip(&refs)
            .all(|(a, b)| (a - b).abs() <= (hi - lo) * 1e-12)
        {
            converged = true;
            break;
        }
        refs = new_refs;
    }
    if !converged {
        // keep the best grid-minimax iterate seen; flagged in the stats
        coeffs = best.expect("at least one iteration ran").1;
    }

    // final verification pass on the dense grid
    let resid: Vec<f64> = grid
        .iter()
        .map(|&x| tanh_oracle(x) - horner(&coeffs, x - lo))
        .collect();
    let extrema = alternating_extrema(&grid, &resid, n);
    let max_err = resid.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let mags: Vec<f64> = extrema.iter().map(|&(_, r)| r.abs()).collect();
    let (lo_mag, hi_mag) = mags
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
    let spread = if hi_mag > 0.0 { (hi_mag - lo_mag) / hi_mag } else { 0.0 };
    (
        coeffs,
        PieceStats { extrema, max_err, spread, fell_back: !converged },
    )
}

/// Solve the alternation system P(x_i) + (−1)^i E = tanh(x_i) for the degree+1
/// coefficients (in u = x − lo) and E.
fn solve_alternation(degree: usize, lo: f64, refs: &[f64]) -> Vec<f64> {
    let n = refs.len();
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for (i, &x) in refs.iter().enumerate() {
        let u = x - lo;
        let mut pw = 1.0;
        for k in 0..=degree {
            m[i][k] = pw;
            pw *= u;
        }
        m[i][degree + 1] = if i % 2 == 0 { 1.0 } else { -1.0 };
        m[i][n] = tanh_oracle(x);
    }
    let sol = gauss_solve(&mut m);
    sol[..=degree].to_vec()
}

/// Partial-pivot Gaussian elimination on an n×(n+1) augmented matrix.
fn gauss_solve(m: &mut [Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for row in 0..n {
            if row != col && m[row][col] != 0.0 {
                let f = m[row][col] / m[col][col];
                for k in col..=n {
                    let v = m[col][k];
                    m[row][k] -= f * v;
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// Locate `n` alternating extrema of the residual: collapse the signed residual
/// into sign runs keeping each run's largest-|r| point (interval endpoints
/// included), then pick the n-window maximizing the smallest magnitude — noise
/// wiggles lose to the true alternation set.
fn alternating_extrema(grid: &[f64], resid: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut candidates: Vec<usize> = vec![0];
    for i in 1..grid.len() - 1 {
        if (resid[i] - resid[i - 1]) * (resid[i + 1] - resid[i]) <= 0.0 {
            candidates.push(i);
        }
    }
    candidates.push(grid.len() - 1);

    let mut runs: Vec<(f64, f64)> = Vec::new();
    for &i in &candidates {
        let (x, r) = (grid[i], resid[i]);
        match runs.last_mut() {
            Some(last) if (last.1 >= 0.0) == (r >= 0.0) => {
                if r.abs() > last.1.abs() {
                    *last = (x, r);
                }
            }
            _ => runs.push((x, r)),
        }
    }
    if runs.len() <= n {
        return runs;
    }
    let best_start = (0..=runs.len() - n)
        .max_by(|&a, &b| {
            let min_a = runs[a..a + n].iter().map(|&(_, r)| r.abs()).fold(f64::INFINITY, f64::min);
            let min_b = runs[b..b + n].iter().map(|&(_, r)| r.abs()).fold(f64::INFINITY, f64::min);
            min_a.total_cmp(&min_b)
        })
        .unwrap();
    runs[best_start..best_start + n].to_vec()
}
