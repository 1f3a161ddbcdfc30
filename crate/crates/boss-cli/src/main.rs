//! Benchmark harness CLI for sequential multi-task linear bandits.
//!
//! Exit codes: 0 on success, 1 on configuration/validation errors, 2 on
//! runtime failures (including failed self-test checks).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use boss_core::error::Error;
use boss_core::harness::{
    run_experiment, run_sweep, selftest, ExperimentConfig, SelftestOptions, SweepGrid,
};
use boss_core::{cover_size_bound, theorem1_params};

/// Environment variable overriding the parent of relative output directories.
const OUTPUT_ROOT_VAR: &str = "BOSS_OUTPUT_ROOT";

#[derive(Parser)]
#[command(
    name = "boss",
    version,
    about = "Sequential multi-task linear bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every (algorithm, seed, repetition) job of a config and write
    /// trace CSVs, a summary CSV and a manifest
    Run {
        /// Experiment config (TOML)
        config: PathBuf,
    },
    /// Sweep a hyperparameter grid over a config at reduced repetitions
    Sweep {
        /// Experiment config (TOML)
        config: PathBuf,
        /// Grid file (TOML, `[grid]` table with per-knob value lists)
        grid: PathBuf,
    },
    /// Print the closed-form default parameters for a problem size
    Params {
        n_tasks: usize,
        tau: usize,
        d: usize,
        m: usize,
        /// Concentration constant inside the residual threshold
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
    },
    /// Print the cardinality bound for an exact subspace cover
    CoverSize { d: usize, m: usize, eps: f64 },
    /// Run the built-in invariant checks
    Selftest {
        /// Perturb the matrix projection inside the geometry checks
        /// (negative control; nonzero values are meant to fail)
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
}

fn output_root() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from)
}

fn exit_code_for(err: &Error) -> ExitCode {
    if err.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Run { config } => {
            let (cfg, raw) = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg, &raw, output_root().as_deref())?;
            println!("config digest {}", report.config_digest);
            let mut failures = 0usize;
            for s in &report.summaries {
                match &s.error {
                    None => println!(
                        "{:<16} seed {:<20} regret {:>14.3} tail-subspace-err {:>8.4} ({:.2}s)",
                        s.algorithm,
                        s.seed,
                        s.final_cumulative_regret,
                        s.mean_subspace_error_last10,
                        s.wall_clock_seconds
                    ),
                    Some(e) => {
                        failures += 1;
                        println!("{:<16} seed {:<20} FAILED: {e}", s.algorithm, s.seed);
                    }
                }
            }
            println!("wrote {}", report.out_dir.display());
            if failures > 0 {
                eprintln!("{failures} run(s) failed");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { config, grid } => {
            let (cfg, _) = ExperimentConfig::load(&config)?;
            let grid = SweepGrid::load(&grid)?;
            let outcome = run_sweep(&cfg, &grid, output_root().as_deref())?;
            println!(
                "{:<5} {:<6} {:<6} {:<6} {:<6} {:<6} {:<16} {:>14} {}",
                "rank", "c2", "tau1", "tau2", "alpha", "p", "algorithm", "regret", "status"
            );
            for (rank, r) in outcome.rows.iter().enumerate() {
                println!(
                    "{:<5} {:<6} {:<6} {:<6} {:<6} {:<6} {:<16} {:>14.3} {} {}",
                    rank + 1,
                    r.point.c2.map(|v| v.to_string()).unwrap_or_default(),
                    r.point.tau1.map(|v| v.to_string()).unwrap_or_default(),
                    r.point.tau2.map(|v| v.to_string()).unwrap_or_default(),
                    r.point.alpha.map(|v| v.to_string()).unwrap_or_default(),
                    r.point.p.map(|v| v.to_string()).unwrap_or_default(),
                    r.algorithm,
                    r.mean_final_regret,
                    r.status,
                    r.reason
                );
            }
            println!("wrote {}", outcome.out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Params {
            n_tasks,
            tau,
            d,
            m,
            c2,
        } => {
            let p = theorem1_params(n_tasks, tau, d, m, c2)?;
            println!("p       {:.6}", p.p);
            println!("tau1    {}", p.tau1);
            println!("tau2    {}", p.tau2);
            println!("alpha   {:.6}", p.alpha);
            println!("epsilon {:.6}", p.epsilon);
            println!("delta   {:.3e}", p.delta);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::CoverSize { d, m, eps } => {
            if m < 1 || m >= d {
                return Err(Error::config(format!(
                    "need 1 <= m < d, got m = {m}, d = {d}"
                )));
            }
            if !(eps > 0.0) {
                return Err(Error::config(format!("eps must be positive, got {eps}")));
            }
            let bound = cover_size_bound(d, m, eps);
            println!("cover cardinality bound (4 m sqrt(d) / eps)^(d m)");
            println!("value  {bound:.6e}");
            println!("log10  {:.3}", bound.log10());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest { perturb } => {
            let report = selftest(&SelftestOptions {
                projection_perturbation: perturb,
            });
            for c in &report.checks {
                println!(
                    "{:<28} {}  measured {:>12.3e}  threshold {:>12.3e}",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.measured,
                    c.threshold
                );
            }
            println!(
                "{} checks in {:.2}s",
                report.checks.len(),
                report.elapsed_seconds
            );
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("self-test failed");
                Ok(ExitCode::from(2))
            }
        }
    }
}
