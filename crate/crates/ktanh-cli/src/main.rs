//! `ktanh` — drive the table-based tanh kernel from the shell: generate and
//! verify parameter tables, sweep every bfloat16 pattern, compare against the
//! polynomial/rational baselines, and microbenchmark.
//!
//! Exit codes: 0 success, 1 validation failure (bad table, dominance
//! violation), 2 usage error (bad flags, unknown approximator id).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ktanh::approximator::{build, known_ids, Approximator, BuildContext};
use ktanh::bench::{bench_suite, bench_to_csv};
use ktanh::evaluate::{
    ablation_report, compare, reports_to_csv, reports_to_json, sweep, Domain,
};
use ktanh::optimizer::{
    build_intervals, fit_report_csv, generate_table, objective_of, OptimizerConfig,
};
use ktanh::table::{ParamTable, TABLE_LEN};

#[derive(Parser)]
#[command(
    name = "ktanh",
    version,
    about = "Integer-only tanh for bfloat16: table tooling, accuracy sweeps, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate the parameter table offline and write it as JSON.
    GenTable {
        /// Largest mantissa shift the fit may pick (0..=7).
        #[arg(long, default_value_t = 7)]
        r_max: u8,
        /// Ablation: clamp the add constant at zero (b_min = 0).
        #[arg(long)]
        bmin_zero: bool,
        /// Write the table here; without it the JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-interval fit report CSV here.
        #[arg(long)]
        fit_report: Option<PathBuf>,
    },
    /// Print a table in the two-column text layout.
    DumpTable {
        /// Table JSON; defaults to the embedded reference parameters.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Check a table against a reference, per index: parameters must match
    /// exactly or at least achieve an equal-or-smaller fit objective.
    VerifyTable {
        /// Candidate table JSON; defaults to a freshly generated table.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Reference table JSON; defaults to the embedded reference.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Sweep approximators over every finite bfloat16 pattern.
    Sweep {
        /// Comma-separated approximator ids.
        #[arg(long, value_delimiter = ',', default_value = "ktanh")]
        algos: Vec<String>,
        /// Parameter table for the kernel; defaults to the embedded reference.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Write the report here; without it it goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit JSON (with per-interval details) instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Sweep several approximators and rank them best-first.
    Compare {
        /// Comma-separated approximator ids; defaults to all of them.
        #[arg(long, value_delimiter = ',')]
        algos: Option<Vec<String>>,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Sweep the kernel under two tables and list where they differ.
    Ablate {
        /// Baseline table; defaults to the embedded reference.
        #[arg(long)]
        default: Option<PathBuf>,
        /// Comparison table; defaults to a freshly generated b_min=0 table.
        #[arg(long)]
        ablation: Option<PathBuf>,
        /// Write the JSON report here; without it it goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time approximators over a fixed random batch (report-only numbers).
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "ktanh")]
        algos: Vec<String>,
        #[arg(long, default_value_t = 65536)]
        batch: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn load_table(path: Option<&Path>) -> Result<ParamTable> {
    match path {
        None => Ok(ParamTable::reference().clone()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ParamTable::from_json_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

/// Resolve ids against the registry; an unknown id is a usage error (exit 2).
fn build_algos(ids: &[String], ctx: &BuildContext) -> Result<Vec<Box<dyn Approximator>>, i32> {
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        match build(id, ctx) {
            Ok(a) => out.push(a),
            Err(e) => {
                eprintln!("error: {e}");
                return Err(2);
            }
        }
    }
    Ok(out)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::GenTable { r_max, bmin_zero, out, fit_report } => {
            let cfg = OptimizerConfig { r_max, bmin_zero };
            let (table, rows) = generate_table(&cfg)?;
            let json = table.to_json_string();
            if let Some(path) = &fit_report {
                fs::write(path, fit_report_csv(&rows))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            match &out {
                Some(path) => {
                    fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
                    // the JSON went to a file, so stdout can carry the summary
                    print!("{}", fit_report_csv(&rows));
                }
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::DumpTable { table } => {
            let table = load_table(table.as_deref())?;
            print!("{}", table.dump_text());
            Ok(0)
        }
        Command::VerifyTable { table, reference } => {
            let candidate = match table {
                Some(p) => load_table(Some(&p))?,
                None => generate_table(&OptimizerConfig::default())?.0,
            };
            let reference = load_table(reference.as_deref())?;
            Ok(verify(&candidate, &reference))
        }
        Command::Sweep { algos, table, out, json } => {
            let ctx = BuildContext { table: load_table(table.as_deref())? };
            let approxes = match build_algos(&algos, &ctx) {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let reports: Vec<_> =
                approxes.iter().map(|a| sweep(a.as_ref(), Domain::Full)).collect();
            let content = if json { reports_to_json(&reports) } else { reports_to_csv(&reports) };
            emit(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Compare { algos, table, out, json } => {
            let ids: Vec<String> = algos
                .unwrap_or_else(|| known_ids().iter().map(|s| s.to_string()).collect());
            let ctx = BuildContext { table: load_table(table.as_deref())? };
            let approxes = match build_algos(&ids, &ctx) {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let ranked = compare(&approxes, Domain::Full);
            let content = if json { reports_to_json(&ranked) } else { reports_to_csv(&ranked) };
            emit(out.as_deref(), &content)?;
            Ok(0)
        }
        Command::Ablate { default, ablation, out } => {
            let default_table = load_table(default.as_deref())?;
            let ablation_table = match ablation {
                Some(p) => load_table(Some(&p))?,
                None => generate_table(&OptimizerConfig { bmin_zero: true, ..Default::default() })?.0,
            };
            let report = ablation_report(&default_table, &ablation_table);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            if out.is_some() {
                println!(
                    "tables differ at {} of {TABLE_LEN} indices; max_abs_err {} -> {}",
                    report.differing_indices.len(),
                    report.default_table_report.max_abs_err,
                    report.ablation_table_report.max_abs_err
                );
            }
            emit(out.as_deref(), &json)?;
            Ok(0)
        }
        Command::Bench { algos, batch, reps, table, out } => {
            if batch < 1024 {
                eprintln!("error: --batch must be at least 1024 (got {batch})");
                return Ok(2);
            }
            let ctx = BuildContext { table: load_table(table.as_deref())? };
            let approxes = match build_algos(&algos, &ctx) {
                Ok(a) => a,
                Err(code) => return Ok(code),
            };
            let reports = bench_suite(&approxes, batch, reps);
            emit(out.as_deref(), &bench_to_csv(&reports))?;
            Ok(0)
        }
    }
}

/// Per-index verdicts, then exit 1 naming the first violation if any.
fn verify(candidate: &ParamTable, reference: &ParamTable) -> i32 {
    let intervals = build_intervals();
    let mut first_violation = None;
    for iv in &intervals {
        let t = iv.t;
        let cand = (candidate.e[t], candidate.r[t], candidate.b[t]);
        let refr = (reference.e[t], reference.r[t], reference.b[t]);
        let cand_obj = objective_of(iv, cand.0, cand.1, cand.2);
        let ref_obj = objective_of(iv, refr.0, refr.1, refr.2);
        let status = if cand == refr {
            "EXACT"
        } else if cand_obj <= ref_obj {
            "ok"
        } else {
            first_violation.get_or_insert(t);
            "VIOLATION"
        };
        println!(
            "{t:05b}  candidate ({:3},{},{:4}) obj {:6}  reference ({:3},{},{:4}) obj {:6}  {status}",
            cand.0, cand.1, cand.2, cand_obj, refr.0, refr.1, refr.2, ref_obj
        );
    }
    match first_violation {
        None => 0,
        Some(t) => {
            eprintln!("verification failed: objective exceeds the reference at index {t:05b}");
            1
        }
    }
}
