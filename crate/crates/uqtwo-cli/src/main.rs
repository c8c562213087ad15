//! Batch orchestration of the verification suites with machine-readable
//! reports: one JSONL file per suite plus a human summary, exit status 0 iff
//! every selected check passes.
//!
//! Reports are deterministic for a fixed (config, seed): suites never record
//! wall time in the structured output (it goes to the summary only), numeric
//! values serialize in shortest-roundtrip form (exact f64), and all sampled
//! checks draw from a seeded splittable generator.

mod suites;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use uqtwo::report::SuiteReport;

/// Verification laboratory for the compact quantum group U_q(2).
#[derive(Debug, Clone, Parser)]
#[command(name = "uqtwo", version, about)]
pub struct RunConfig {
    /// Modulus of the deformation parameter, in (0, 1).
    #[arg(long = "q-abs", default_value_t = 0.5)]
    pub q_abs: f64,

    /// Phase angle theta of q = |q| e^{i pi theta}, in (-1, 1].
    #[arg(long, default_value_t = uqtwo::THETA_DEFAULT)]
    pub theta: f64,

    /// Peter-Weyl window cap (doubled spin l2).
    #[arg(long = "l2max", default_value_t = 10)]
    pub l2_max: u32,

    /// Lower k bound of the Peter-Weyl window.
    #[arg(long = "kmin", default_value_t = -16, allow_hyphen_values = true)]
    pub k_min: i32,

    /// Upper k bound of the Peter-Weyl window.
    #[arg(long = "kmax", default_value_t = 16)]
    pub k_max: i32,

    /// Heisenberg window cap in the l2(N) slot.
    #[arg(long = "nmax", default_value_t = 40)]
    pub n_max: u32,

    /// Half-width of the Heisenberg k and l ranges.
    #[arg(long = "heis-kl", default_value_t = 20)]
    pub heis_kl: u32,

    /// Tridiagonal truncation depth for the fixed-point block solves.
    #[arg(long = "mmax", default_value_t = 40)]
    pub m_max: usize,

    /// Fourier order of the Powers-Rieffel projection.
    #[arg(long = "fourier-order", default_value_t = 64)]
    pub fourier_order: i64,

    /// Base residual tolerance of the operator relation suites.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// Suites to run (repeatable); default: all.
    #[arg(long = "suite")]
    pub suites: Vec<String>,

    /// Seed for sampled checks.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Output directory for the per-suite JSONL reports.
    #[arg(long, default_value = "reports")]
    pub out: PathBuf,

    /// Max number of suites running concurrently.
    #[arg(long, default_value_t = 2)]
    pub workers: usize,

    /// Index-box half-widths for the truncated Fredholm computations.
    #[arg(long = "index-box", default_values_t = vec![32, 48, 64])]
    pub index_box: Vec<i32>,

    /// Truncation N for the spectral-dimension partial sums.
    #[arg(long = "spec-nmax", default_value_t = 10_000)]
    pub spec_n_max: u64,
}

impl RunConfig {
    pub fn index_boxes(&self) -> Vec<i32> {
        self.index_box.clone()
    }

    pub fn p_grid(&self) -> Vec<f64> {
        vec![3.5, 3.7, 3.8, 3.9, 3.95, 4.05, 4.1, 4.2, 4.3, 4.5]
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.q_abs > 0.0 && self.q_abs < 1.0) {
            return Err(format!("--q-abs must lie in (0, 1), got {}", self.q_abs));
        }
        if !(self.theta > -1.0 && self.theta <= 1.0) {
            return Err(format!("--theta must lie in (-1, 1], got {}", self.theta));
        }
        if self.k_min >= self.k_max {
            return Err("--kmin must be below --kmax".into());
        }
        if self.m_max < 8 {
            return Err("--mmax must be at least 8".into());
        }
        if self.fourier_order < 8 {
            return Err("--fourier-order must be at least 8".into());
        }
        if self.workers == 0 {
            return Err("--workers must be positive".into());
        }
        if self.spec_n_max < 200 {
            return Err("--spec-nmax must be at least 200".into());
        }
        if self.index_box.iter().any(|b| *b < 8) {
            return Err("--index-box entries must be at least 8".into());
        }
        for s in &self.suites {
            if !suites::SUITES.contains(&s.as_str()) {
                return Err(format!("unknown suite '{s}' (known: {})", suites::SUITES.join(", ")));
            }
        }
        Ok(())
    }
}

/// One structured record per suite: config echo plus the check list.
#[derive(Serialize)]
struct RunRecord<'a> {
    suite: &'a str,
    q_abs: f64,
    theta: f64,
    seed: u64,
    pass: bool,
    checks: &'a [uqtwo::report::Check],
}

fn main() {
    let cfg = RunConfig::parse();
    if let Err(msg) = cfg.validate() {
        eprintln!("configuration error: {msg}");
        std::process::exit(2);
    }
    let selected: Vec<String> = if cfg.suites.is_empty() {
        suites::SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.suites.clone()
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("configuration error: cannot create {}: {e}", cfg.out.display());
        std::process::exit(2);
    }

    // fixed-size worker pool over the suite queue; a panicking suite is
    // reported as failed without aborting the others
    let queue = Arc::new(Mutex::new(selected.clone().into_iter().collect::<Vec<_>>()));
    let (tx, rx) = mpsc::channel::<(String, Result<SuiteReport, String>, f64)>();
    let workers = cfg.workers.min(selected.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let queue = Arc::clone(&queue);
            let tx = tx.clone();
            let cfg = cfg.clone();
            scope.spawn(move || loop {
                let name = { queue.lock().unwrap().pop() };
                let Some(name) = name else { break };
                let t0 = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| suites::run_suite(&name, &cfg)))
                    .map_err(|e| {
                        e.downcast_ref::<String>()
                            .cloned()
                            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "suite panicked".into())
                    });
                let secs = t0.elapsed().as_secs_f64();
                tx.send((name, outcome, secs)).expect("main thread alive");
            });
        }
        drop(tx);

        let mut results: Vec<(String, Result<SuiteReport, String>, f64)> = rx.iter().collect();
        results.sort_by(|a, b| a.0.cmp(&b.0));

        let mut all_pass = true;
        println!("{:<12} {:>7} {:>7} {:>9}  {}", "suite", "checks", "failed", "time", "status");
        for (name, outcome, secs) in &results {
            match outcome {
                Ok(report) => {
                    let failed = report.checks.iter().filter(|c| !c.pass).count();
                    all_pass &= report.pass;
                    let path = cfg.out.join(format!("{name}.jsonl"));
                    match write_report(&path, &cfg, report) {
                        Ok(()) => {}
                        Err(e) => {
                            eprintln!("cannot write {}: {e}", path.display());
                            all_pass = false;
                        }
                    }
                    println!(
                        "{:<12} {:>7} {:>7} {:>8.2}s  {}",
                        name,
                        report.checks.len(),
                        failed,
                        secs,
                        if report.pass { "pass" } else { "FAIL" }
                    );
                    if let Some(c) = report.worst_failing() {
                        println!("  first failing check: {} (value {:e}, bound {:e})", c.id, c.value, c.bound);
                    }
                }
                Err(msg) => {
                    all_pass = false;
                    println!("{:<12} {:>7} {:>7} {:>8.2}s  FAIL (panic: {msg})", name, 0, 0, secs);
                }
            }
        }
        if !all_pass {
            std::process::exit(1);
        }
    });
}

fn write_report(path: &std::path::Path, cfg: &RunConfig, report: &SuiteReport) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    let record = RunRecord {
        suite: &report.suite,
        q_abs: cfg.q_abs,
        theta: cfg.theta,
        seed: cfg.seed,
        pass: report.pass,
        checks: &report.checks,
    };
    writeln!(f, "{}", serde_json::to_string(&record)?)?;
    for check in &report.checks {
        writeln!(f, "{}", serde_json::to_string(check)?)?;
    }
    Ok(())
}
