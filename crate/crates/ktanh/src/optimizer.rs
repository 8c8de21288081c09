//! Offline fitting of kernel parameter tables.
//!
//! For each of the 32 indices reachable from [0.25, 3.75] the pipeline is:
//!
//! 1. enumerate every positive bfloat16 in the interval and take tanh of each as
//!    the target, remembering the target's encoded exponent/mantissa fields,
//! 2. pick one common output exponent E: project every target mantissa onto E
//!    (keep it when exponents match, else clamp to 0 or 127) and choose the E
//!    minimizing the squared real-value error against the unrounded targets,
//! 3. search shift r = 0..=r_max, with the add constant b per r set to the rounded
//!    least-squares value clamped into overflow-safe bounds, minimizing the integer
//!    residual Σ(M̂ − ((m >> r) + b))²; ties prefer smaller r, then smaller |b|.
//!
//! The b bounds make overflow impossible by construction: with the interval's
//! mantissa MSB value v, inputs span m ∈ [16v, 16(v+1)−1], so
//! b_max = 127 − ((16(v+1)−1) >> r) and b_min = −v·⌊2^(4−r)⌋ (0 for r ≥ 5).

use crate::bf16::Bf16;
use crate::oracle::tanh_oracle;
use crate::table::{ParamTable, TableError, T1_BITS, T2_BITS, TABLE_LEN};

#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig {
    /// Largest shift the fit may use (0..=7).
    pub r_max: u8,
    /// Ablation: forbid negative add constants by forcing b_min = 0.
    pub bmin_zero: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { r_max: 7, bmin_zero: false }
    }
}

/// One enumerated input and its tanh target.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    /// Input mantissa field.
    pub m: u8,
    /// Decoded input value.
    pub x: f64,
    /// Unrounded target tanh(x).
    pub y: f64,
    /// Exponent field of the target rounded to bfloat16.
    pub target_e: u8,
    /// Mantissa field of the target rounded to bfloat16.
    pub target_m: u8,
}

/// All samples sharing one table index.
#[derive(Clone, Debug)]
pub struct IntervalSamples {
    pub t: usize,
    pub samples: Vec<Sample>,
}

/// Per-interval fit summary, one row of the optimizer's report.
#[derive(Clone, Copy, Debug)]
pub struct FitRow {
    pub t: usize,
    pub e: u8,
    pub r: u8,
    pub b: i16,
    pub b_min: i16,
    pub b_max: i16,
    pub objective: u64,
    pub candidates: u32,
}

/// Enumerate every positive bfloat16 in [0.25, 3.75] grouped by table index.
/// All 32 indices are populated: the four exponents 125..=128 in range carry the
/// four distinct LSB patterns 01, 10, 11, 00.
pub fn build_intervals() -> Vec<IntervalSamples> {
    let mut out: Vec<IntervalSamples> = (0..TABLE_LEN)
        .map(|t| IntervalSamples { t, samples: Vec::new() })
        .collect();
    for bits in T1_BITS..=T2_BITS {
        let x_b = Bf16(bits);
        let x = x_b.decode();
        let y = tanh_oracle(x);
        let enc = Bf16::encode(y);
        let t = crate::kernel::index_of(x_b);
        out[t].samples.push(Sample {
            m: x_b.mantissa() as u8,
            x,
            y,
            target_e: enc.exponent() as u8,
            target_m: enc.mantissa() as u8,
        });
    }
    out
}

/// Project a target's fields onto a chosen common exponent.
fn project_mantissa(e: u8, target_e: u8, target_m: u8) -> u8 {
    use std::cmp::Ordering::*;
    match e.cmp(&target_e) {
        Equal => target_m,
        Greater => 0,
        Less => 127,
    }
}

/// Step 2: choose the common output exponent and the projected mantissas M̂.
/// Candidates are the exponents the targets actually round to; the winner
/// minimizes Σ(y − ŷ)² against the unrounded targets with ŷ = 2^(E−127)(1+M̂/128).
/// Equal sums keep the smaller E.
pub fn select_common_exponent(iv: &IntervalSamples) -> (u8, Vec<u8>) {
    let mut candidates: Vec<u8> = iv.samples.iter().map(|s| s.target_e).collect();
    candidates.sort_unstable();
    candidates.dedup();

    let mut best: Option<(f64, u8, Vec<u8>)> = None;
    for &e in &candidates {
        let mhat: Vec<u8> = iv
            .samples
            .iter()
            .map(|s| project_mantissa(e, s.target_e, s.target_m))
            .collect();
        let sse: f64 = iv
            .samples
            .iter()
            .zip(&mhat)
            .map(|(s, &m)| {
                let yh = 2.0_f64.powi(e as i32 - 127) * (1.0 + m as f64 / 128.0);
                (s.y - yh) * (s.y - yh)
            })
            .sum();
        match &best {
            Some((best_sse, _, _)) if sse >= *best_sse => {} // ties keep the earlier (smaller) E
            _ => best = Some((sse, e, mhat)),
        }
    }
    let (_, e, mhat) = best.expect("interval has samples");
    (e, mhat)
}

/// Overflow-safe bounds for the add constant at shift `r` in the interval whose
/// mantissa-MSB value is `idx_val`.
pub fn bounds(r: u8, idx_val: u8, cfg: &OptimizerConfig) -> (i16, i16) {
    debug_assert!(r <= 7 && idx_val <= 7);
    let b_max = 127 - ((((idx_val as i16 + 1) * 16) - 1) >> r);
    let b_min = if cfg.bmin_zero {
        0
    } else if r <= 4 {
        -(idx_val as i16) * (1 << (4 - r))
    } else {
        0 // ⌊2^(4-r)⌋ = 0 once the shift exceeds the 4 mantissa LSBs
    };
    (b_min, b_max)
}

/// Step 3: constrained integer least squares over (r, b).
pub fn fit_shift_add(iv: &IntervalSamples, mhat: &[u8], cfg: &OptimizerConfig) -> (u8, i16, u64) {
    let idx_val = (iv.t & 0b111) as u8;
    let n = iv.samples.len() as f64;
    let mut best: Option<(u64, u8, i16)> = None;
    for r in 0..=cfg.r_max.min(7) {
        let (b_min, b_max) = bounds(r, idx_val, cfg);
        let shifted: Vec<i16> = iv.samples.iter().map(|s| (s.m >> r) as i16).collect();
        let residual_sum: i32 = shifted
            .iter()
            .zip(mhat)
            .map(|(&sh, &m)| m as i32 - sh as i32)
            .sum();
        // Interval sizes are powers of two, so this mean is exact in f64 and
        // round() (half away from zero) is deterministic even on exact halves.
        let b = ((residual_sum as f64 / n).round() as i16).clamp(b_min, b_max);
        let objective: u64 = shifted
            .iter()
            .zip(mhat)
            .map(|(&sh, &m)| {
                let d = (m as i64) - (sh + b) as i64;
                (d * d) as u64
            })
            .sum();
        let key = (objective, r, b.unsigned_abs() as i16);
        let better = match best {
            None => true,
            Some((bo, br, bb)) => key < (bo, br, bb.unsigned_abs() as i16),
        };
        if better {
            best = Some((objective, r, b));
        }
    }
    let (objective, r, b) = best.expect("r_max >= 0 yields a candidate");
    (r, b, objective)
}

/// Integer fit objective of an arbitrary (e, r, b) entry on an interval, with the
/// mantissa targets projected onto that entry's own exponent. This is the scoring
/// `verify` uses, so two tables can be compared without rerunning the fit.
pub fn objective_of(iv: &IntervalSamples, e: u8, r: u8, b: i16) -> u64 {
    iv.samples
        .iter()
        .map(|s| {
            let mh = project_mantissa(e, s.target_e, s.target_m) as i64;
            let out = ((s.m >> r) as i16 + b) as i64;
            let d = mh - out;
            (d * d) as u64
        })
        .sum()
}

/// Run the full pipeline and assemble a validated table plus the per-interval
/// fit report. Pure function of the config; repeated runs are identical.
pub fn generate_table(cfg: &OptimizerConfig) -> Result<(ParamTable, Vec<FitRow>), TableError> {
    let intervals = build_intervals();
    let mut e_out = [0u8; TABLE_LEN];
    let mut r_out = [0u8; TABLE_LEN];
    let mut b_out = [0i16; TABLE_LEN];
    let mut report = Vec::with_capacity(TABLE_LEN);
    for iv in &intervals {
        let (e, mhat) = select_common_exponent(iv);
        let (r, b, objective) = fit_shift_add(iv, &mhat, cfg);
        let (b_min, b_max) = bounds(r, (iv.t & 0b111) as u8, cfg);
        e_out[iv.t] = e;
        r_out[iv.t] = r;
        b_out[iv.t] = b;
        report.push(FitRow {
            t: iv.t,
            e,
            r,
            b,
            b_min,
            b_max,
            objective,
            candidates: cfg.r_max.min(7) as u32 + 1,
        });
    }
    let provenance = format!(
        "generated by the table optimizer (r_max={}, b_min={})",
        cfg.r_max,
        if cfg.bmin_zero { "0" } else { "default" }
    );
    let table = ParamTable::new(e_out, r_out, b_out, provenance);
    table.validate()?;
    Ok((table, report))
}

/// CSV rendering of a fit report: t, E, r, b, b_min, b_max, objective, candidates.
pub fn fit_report_csv(rows: &[FitRow]) -> String {
    let mut out = String::from("t,E,r,b,b_min,b_max,objective,candidates\n");
    for row in rows {
        out.push_str(&format!(
            "{:05b},{},{},{},{},{},{},{}\n",
            row.t, row.e, row.r, row.b, row.b_min, row.b_max, row.objective, row.candidates
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FROZEN_E: [u8; 32] = [
        126, 126, 126, 126, 126, 126, 127, 127, 125, 125, 125, 125, 125, 125, 125, 125,
        125, 126, 126, 126, 126, 126, 126, 126, 126, 126, 126, 126, 126, 126, 126, 126,
    ];
    const FROZEN_R: [u8; 32] = [
        2, 3, 3, 3, 4, 4, 4, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 2, 2,
        2, 2,
    ];
    const FROZEN_B: [i16; 32] = [
        119, 121, 121, 120, 123, 122, -6, -112, 1, -4, -6, -8, -10, -12, -15, -18, 112, -4, -1, 2,
        4, 4, 4, 4, 65, 73, 74, 73, 89, 89, 89, 88,
    ];

    #[test]
    fn interval_enumeration_matches_the_bit_structure() {
        let ivs = build_intervals();
        assert_eq!(ivs.len(), 32);
        let total: usize = ivs.iter().map(|iv| iv.samples.len()).sum();
        assert_eq!(total, 497); // 4 full exponents × 128 patterns, minus the 15 above 3.75

        // index 10000: the 16 values in [0.5, 0.5625), mantissas 0..=15
        let iv = &ivs[0b10000];
        assert_eq!(iv.samples.len(), 16);
        assert_eq!(iv.samples.first().unwrap().x, 0.5);
        assert!(iv.samples.iter().all(|s| s.x < 0.5625));
        assert_eq!(
            iv.samples.iter().map(|s| s.m).collect::<Vec<_>>(),
            (0..16).collect::<Vec<_>>()
        );

        // index 01000 starts exactly at the bypass threshold
        assert_eq!(ivs[0b01000].samples.first().unwrap().x, 0.25);

        // the top interval is cut down to the single sample 3.75
        assert_eq!(ivs[0b00111].samples.len(), 1);
        assert_eq!(ivs[0b00111].samples[0].x, 3.75);

        for iv in &ivs {
            assert!(!iv.samples.is_empty(), "index {:05b} unreachable", iv.t);
        }
    }

    #[test]
    fn exponent_selection_matches_known_intervals() {
        let ivs = build_intervals();
        // targets around tanh(0.5) straddle 0.5, selection settles on 125
        assert_eq!(select_common_exponent(&ivs[0b10000]).0, 125);
        assert_eq!(select_common_exponent(&ivs[0b01111]).0, 125);
        // single sample 3.75: target rounds to 1.0, so E = 127 and M̂ = M
        let (e, mhat) = select_common_exponent(&ivs[0b00111]);
        assert_eq!(e, 127);
        assert_eq!(mhat, vec![ivs[0b00111].samples[0].target_m]);
    }

    #[test]
    fn bounds_match_hand_computed_values() {
        let cfg = OptimizerConfig::default();
        assert_eq!(bounds(0, 0, &cfg), (0, 112));
        assert_eq!(bounds(0, 7, &cfg), (-112, 0));
        assert_eq!(bounds(6, 7, &cfg), (0, 126));
        let ablation = OptimizerConfig { bmin_zero: true, ..cfg };
        assert_eq!(bounds(0, 7, &ablation), (0, 0));
    }

    #[test]
    fn bounds_guarantee_no_overflow_for_every_b_in_range() {
        let cfg = OptimizerConfig::default();
        for r in 0u8..=7 {
            for idx_val in 0u8..=7 {
                let (b_min, b_max) = bounds(r, idx_val, &cfg);
                assert!(b_min <= b_max, "empty range at r={r} idx={idx_val}");
                for b in b_min..=b_max {
                    for m in (idx_val * 16)..=(idx_val * 16 + 15) {
                        let out = ((m >> r) as i16) + b;
                        assert!(
                            (0..=127).contains(&out),
                            "overflow: r={r} idx={idx_val} b={b} m={m} -> {out}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn fit_recovers_reference_rows_and_exact_fits() {
        let ivs = build_intervals();
        let cfg = OptimizerConfig::default();

        let (_, mhat) = select_common_exponent(&ivs[0b11000]);
        assert_eq!(fit_shift_add(&ivs[0b11000], &mhat, &cfg), (0, 65, 24));

        let (_, mhat) = select_common_exponent(&ivs[0b00000]);
        let (r, b, _) = fit_shift_add(&ivs[0b00000], &mhat, &cfg);
        assert_eq!((r, b), (2, 119));

        // degenerate: targets exactly (m >> 0) + c → objective 0 at that (r, c)
        let iv = IntervalSamples {
            t: 0b01001, // idx_val 1, mantissas 16..=31
            samples: (16u8..=31)
                .map(|m| Sample { m, x: 0.0, y: 0.0, target_e: 125, target_m: m - 4 })
                .collect(),
        };
        let mhat: Vec<u8> = iv.samples.iter().map(|s| s.target_m).collect();
        assert_eq!(fit_shift_add(&iv, &mhat, &cfg), (0, -4, 0));
    }

    #[test]
    fn generated_table_is_the_frozen_fit() {
        let (table, report) = generate_table(&OptimizerConfig::default()).unwrap();
        assert_eq!(table.e, FROZEN_E);
        assert_eq!(table.r, FROZEN_R);
        assert_eq!(table.b, FROZEN_B);
        assert_eq!(report.len(), 32);
        assert!(report.iter().all(|row| row.candidates == 8));
        let objectives: Vec<u64> = report.iter().map(|row| row.objective).collect();
        assert_eq!(
            objectives,
            vec![2, 1, 3, 3, 0, 0, 0, 0, 48, 5, 7, 8, 9, 10, 17, 17, 60, 21, 16, 8, 8, 5, 7, 3, 24, 11, 8, 6, 7, 7, 3, 4]
        );
    }

    #[test]
    fn generated_table_dominates_the_reference_objectives() {
        let reference = ParamTable::reference();
        let ivs = build_intervals();
        let (table, report) = generate_table(&OptimizerConfig::default()).unwrap();
        let mut exact = 0;
        for iv in &ivs {
            let t = iv.t;
            let ours = report[t].objective;
            let theirs = objective_of(iv, reference.e[t], reference.r[t], reference.b[t]);
            assert!(ours <= theirs, "index {t:05b}: {ours} > {theirs}");
            if (table.e[t], table.r[t], table.b[t]) == (reference.e[t], reference.r[t], reference.b[t]) {
                exact += 1;
            }
        }
        assert_eq!(exact, 19); // informational count, frozen for regression
    }

    #[test]
    fn reference_objectives_are_the_frozen_values() {
        let reference = ParamTable::reference();
        let ivs = build_intervals();
        let objs: Vec<u64> = ivs
            .iter()
            .map(|iv| objective_of(iv, reference.e[iv.t], reference.r[iv.t], reference.b[iv.t]))
            .collect();
        assert_eq!(
            objs,
            vec![2, 9, 5, 5, 0, 0, 0, 0, 48, 5, 7, 8, 9, 10, 17, 17, 60, 21, 16, 8, 8, 5, 7, 3, 24, 13, 8, 6, 13, 7, 3, 16]
        );
    }

    #[test]
    fn ablation_clamps_negative_adds_away() {
        let cfg = OptimizerConfig { bmin_zero: true, ..Default::default() };
        let (table, _) = generate_table(&cfg).unwrap();
        assert!(table.b.iter().all(|&b| b >= 0));
        // the fit escapes the clamp by shifting more instead of keeping r=0
        assert_eq!((table.e[0b01111], table.r[0b01111], table.b[0b01111]), (125, 1, 42));
        assert_eq!((table.e[0b10001], table.r[0b10001], table.b[0b10001]), (126, 2, 2));
        assert_eq!((table.e[0b10010], table.r[0b10010], table.b[0b10010]), (126, 1, 0));

        // every reference row with negative b must come out different
        let reference = ParamTable::reference();
        for t in 0..32 {
            if reference.b[t] < 0 {
                assert_ne!(
                    (table.e[t], table.r[t], table.b[t]),
                    (reference.e[t], reference.r[t], reference.b[t]),
                    "index {t:05b} should differ under the ablation"
                );
            }
        }
    }

    #[test]
    fn r_max_zero_forces_unshifted_fits() {
        let cfg = OptimizerConfig { r_max: 0, ..Default::default() };
        let (table, _) = generate_table(&cfg).unwrap();
        assert!(table.r.iter().all(|&r| r == 0));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = OptimizerConfig::default();
        let (a, _) = generate_table(&cfg).unwrap();
        let (b, _) = generate_table(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn fit_report_csv_has_the_documented_columns() {
        let (_, report) = generate_table(&OptimizerConfig::default()).unwrap();
        let csv = fit_report_csv(&report);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,E,r,b,b_min,b_max,objective,candidates");
        // bounds column reflects the winning r (here r=2: b_max = 127 - (15 >> 2))
        assert_eq!(lines.next().unwrap(), "00000,126,2,119,0,124,2,8");
        assert_eq!(csv.lines().count(), 33);
    }
}
