//! Wall-clock microbenchmark: nanoseconds per evaluation over a fixed batch.
//!
//! This is deliberately report-only. Min-of-reps squeezes out scheduler noise,
//! but ns/eval on whatever host runs this says nothing portable about the
//! vectorized figures the kernel is designed for — so the numbers are emitted
//! for inspection, never asserted against.

use std::hint::black_box;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::approximator::Approximator;
use crate::bf16::Bf16;

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub approximator: String,
    pub batch: usize,
    pub reps: usize,
    pub ns_per_eval: f64,
    pub host: String,
}

/// Fixed-seed batch of finite patterns shared by every row of a run, so the
/// rows time the same workload.
pub fn make_batch(size: usize) -> Vec<Bf16> {
    let mut rng = StdRng::seed_from_u64(0x5EED_BF16);
    let mut batch = Vec::with_capacity(size);
    while batch.len() < size {
        let b = Bf16::from_bits(rng.gen::<u16>());
        if b.is_finite() {
            batch.push(b);
        }
    }
    batch
}

fn host() -> String {
    format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS)
}

fn time_batch(reps: usize, batch_len: usize, mut pass: impl FnMut()) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let start = Instant::now();
        pass();
        best = best.min(start.elapsed().as_nanos() as f64);
    }
    best / batch_len as f64
}

pub fn bench(approx: &dyn Approximator, batch: &[Bf16], reps: usize) -> BenchReport {
    assert!(batch.len() >= 1024, "batch below 1024 mostly times the harness");
    let reps = reps.max(10); // the min is meaningless over fewer passes
    let ns_per_eval = time_batch(reps, batch.len(), || {
        for &x in batch {
            black_box(approx.eval(black_box(x)));
        }
    });
    BenchReport {
        approximator: approx.id().to_string(),
        batch: batch.len(),
        reps,
        ns_per_eval,
        host: host(),
    }
}

/// Bench each approximator over one shared batch, then append the platform
/// `tanh` (f64, round-tripped through bfloat16) as the reference row.
pub fn bench_suite(approxes: &[Box<dyn Approximator>], batch_size: usize, reps: usize) -> Vec<BenchReport> {
    let batch = make_batch(batch_size);
    let mut reports: Vec<BenchReport> =
        approxes.iter().map(|a| bench(a.as_ref(), &batch, reps)).collect();
    let reps = reps.max(10);
    let ns_per_eval = time_batch(reps, batch.len(), || {
        for &x in &batch {
            black_box(Bf16::encode(black_box(x).decode().tanh()));
        }
    });
    reports.push(BenchReport {
        approximator: "native_tanh".to_string(),
        batch: batch.len(),
        reps,
        ns_per_eval,
        host: host(),
    });
    reports
}

pub fn bench_to_csv(reports: &[BenchReport]) -> String {
    let mut out = String::from("approximator,batch,reps,ns_per_eval,host\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.approximator, r.batch, r.reps, r.ns_per_eval, r.host
        ));
    }
    out
}
