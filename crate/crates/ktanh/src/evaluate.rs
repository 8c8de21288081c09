//! Exhaustive accuracy sweeps over the bfloat16 pattern space.
//!
//! A full sweep is only 65,536 evaluations, so "exhaustive" is cheap — but it
//! must also be reproducible: reports are compared bit-for-bit across runs and
//! acceptance gates. The pattern space is therefore cut into 64 fixed chunks
//! whose partial results are folded in chunk order no matter how many worker
//! threads ran them, making every report identical for any `KTANH_THREADS`.

use serde::Serialize;

use crate::approximator::{build, Approximator, BuildContext};
use crate::bf16::Bf16;
use crate::kernel::index_of;
use crate::oracle::tanh_oracle;
use crate::table::{ParamTable, T1_BITS, T2_BITS, TABLE_LEN};

/// Relative error is reported over |x| ≥ 2^−6 by default: below that tanh x
/// and x agree to O(x³) and the ratio measures quantization noise, not the
/// approximation.
pub const REL_ERR_MIN_ABS: f64 = 0.015625;

const CHUNKS: usize = 64;
const CHUNK: usize = (1 << 16) / CHUNKS;

/// Which finite patterns a sweep visits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Full,
    /// |x| < bound — e.g. 0.25 isolates the kernel's bypass band.
    AbsBelow(f64),
    /// Sign bit clear (x ≥ +0.0). With the full sweep this checks oddness:
    /// an exactly odd approximator reports the same max errors on both.
    Positive,
}

impl Domain {
    fn contains(self, x: f64, bits: u16) -> bool {
        match self {
            Domain::Full => true,
            Domain::AbsBelow(t) => x.abs() < t,
            Domain::Positive => bits & 0x8000 == 0,
        }
    }

    fn label(self) -> String {
        match self {
            Domain::Full => "full".to_string(),
            Domain::AbsBelow(t) => format!("|x|<{t}"),
            Domain::Positive => "x>=0".to_string(),
        }
    }
}

/// Error accumulated over the inputs that hit one table interval.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IntervalErr {
    pub t: usize,
    pub max_abs_err: f64,
    pub mean_abs_err: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ErrorReport {
    pub approximator: String,
    pub domain: String,
    pub max_abs_err: f64,
    #[serde(with = "crate::table::hex_u16")]
    pub argmax_bits: u16,
    pub max_rel_err: f64,
    #[serde(with = "crate::table::hex_u16")]
    pub rel_argmax_bits: u16,
    pub rel_err_domain: String,
    pub per_interval: Vec<IntervalErr>,
    pub sweep_size: usize,
}

struct Partial {
    max_abs: f64,
    argmax: u16,
    max_rel: f64,
    rel_argmax: u16,
    n: usize,
    iv_max: [f64; TABLE_LEN],
    iv_sum: [f64; TABLE_LEN],
    iv_n: [usize; TABLE_LEN],
}

impl Partial {
    fn new() -> Partial {
        Partial {
            max_abs: -1.0, // any real error (0 included) replaces this
            argmax: 0,
            max_rel: -1.0,
            rel_argmax: 0,
            n: 0,
            iv_max: [0.0; TABLE_LEN],
            iv_sum: [0.0; TABLE_LEN],
            iv_n: [0; TABLE_LEN],
        }
    }

    /// Strict > keeps the earlier (smaller-bits) argmax on ties, both inside a
    /// chunk and across the in-order chunk fold.
    fn merge(&mut self, p: &Partial) {
        if p.max_abs > self.max_abs {
            self.max_abs = p.max_abs;
            self.argmax = p.argmax;
        }
        if p.max_rel > self.max_rel {
            self.max_rel = p.max_rel;
            self.rel_argmax = p.rel_argmax;
        }
        self.n += p.n;
        for i in 0..TABLE_LEN {
            self.iv_max[i] = self.iv_max[i].max(p.iv_max[i]);
            self.iv_sum[i] += p.iv_sum[i];
            self.iv_n[i] += p.iv_n[i];
        }
    }
}

fn sweep_chunk(approx: &dyn Approximator, domain: Domain, chunk: usize) -> Partial {
    let mut p = Partial::new();
    for b in chunk * CHUNK..(chunk + 1) * CHUNK {
        let bits = b as u16;
        let bf = Bf16::from_bits(bits);
        if !bf.is_finite() {
            continue;
        }
        let x = bf.decode();
        if !domain.contains(x, bits) {
            continue;
        }
        let want = tanh_oracle(x);
        let err = (approx.eval(bf).decode() - want).abs();
        p.n += 1;
        if err > p.max_abs {
            p.max_abs = err;
            p.argmax = bits;
        }
        if x.abs() >= REL_ERR_MIN_ABS {
            let rel = err / want.abs();
            if rel > p.max_rel {
                p.max_rel = rel;
                p.rel_argmax = bits;
            }
        }
        let mag = bf.magnitude_bits();
        if (T1_BITS..=T2_BITS).contains(&mag) {
            let t = index_of(bf);
            p.iv_max[t] = p.iv_max[t].max(err);
            p.iv_sum[t] += err;
            p.iv_n[t] += 1;
        }
    }
    p
}

fn thread_count() -> usize {
    std::env::var("KTANH_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
}

pub fn sweep(approx: &dyn Approximator, domain: Domain) -> ErrorReport {
    sweep_with_threads(approx, domain, thread_count())
}

pub(crate) fn sweep_with_threads(
    approx: &dyn Approximator,
    domain: Domain,
    threads: usize,
) -> ErrorReport {
    let threads = threads.clamp(1, CHUNKS);
    let mut partials: Vec<(usize, Partial)> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..threads)
            .map(|w| {
                s.spawn(move || {
                    (w..CHUNKS)
                        .step_by(threads)
                        .map(|c| (c, sweep_chunk(approx, domain, c)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    partials.sort_by_key(|&(c, _)| c);
    let mut acc = Partial::new();
    for (_, p) in &partials {
        acc.merge(p);
    }

    let per_interval = (0..TABLE_LEN)
        .map(|t| IntervalErr {
            t,
            max_abs_err: acc.iv_max[t],
            mean_abs_err: if acc.iv_n[t] > 0 { acc.iv_sum[t] / acc.iv_n[t] as f64 } else { 0.0 },
        })
        .collect();
    ErrorReport {
        approximator: approx.id().to_string(),
        domain: domain.label(),
        max_abs_err: acc.max_abs.max(0.0),
        argmax_bits: acc.argmax,
        max_rel_err: acc.max_rel.max(0.0),
        rel_argmax_bits: acc.rel_argmax,
        rel_err_domain: format!("|x|>={REL_ERR_MIN_ABS}"),
        per_interval,
        sweep_size: acc.n,
    }
}

/// Sweep each approximator and return the reports ranked best-first (ascending
/// max_abs_err, ties by id so the order is total).
pub fn compare(approxes: &[Box<dyn Approximator>], domain: Domain) -> Vec<ErrorReport> {
    let mut reports: Vec<ErrorReport> =
        approxes.iter().map(|a| sweep(a.as_ref(), domain)).collect();
    reports.sort_by(|a, b| {
        a.max_abs_err
            .total_cmp(&b.max_abs_err)
            .then_with(|| a.approximator.cmp(&b.approximator))
    });
    reports
}

#[derive(Debug, Serialize)]
pub struct AblationReport {
    pub default_table_report: ErrorReport,
    pub ablation_table_report: ErrorReport,
    /// Indices where the two tables disagree in any of (E, r, b).
    pub differing_indices: Vec<usize>,
}

pub fn ablation_report(default_table: &ParamTable, ablation_table: &ParamTable) -> AblationReport {
    let differing_indices = (0..TABLE_LEN)
        .filter(|&i| {
            (default_table.e[i], default_table.r[i], default_table.b[i])
                != (ablation_table.e[i], ablation_table.r[i], ablation_table.b[i])
        })
        .collect();
    let eval_with = |table: &ParamTable| {
        let approx = build("ktanh", &BuildContext { table: table.clone() })
            .expect("ktanh is registered");
        sweep(approx.as_ref(), Domain::Full)
    };
    AblationReport {
        default_table_report: eval_with(default_table),
        ablation_table_report: eval_with(ablation_table),
        differing_indices,
    }
}

pub fn reports_to_csv(reports: &[ErrorReport]) -> String {
    let mut out = String::from(
        "approximator,domain,max_abs_err,argmax_bits_hex,max_rel_err,rel_argmax_bits_hex,sweep_size\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{:#06X},{},{:#06X},{}\n",
            r.approximator,
            r.domain,
            r.max_abs_err,
            r.argmax_bits,
            r.max_rel_err,
            r.rel_argmax_bits,
            r.sweep_size
        ));
    }
    out
}

pub fn reports_to_json(reports: &[ErrorReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize cleanly")
}
