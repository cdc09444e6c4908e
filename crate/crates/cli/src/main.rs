use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirac_mti::config::RunConfig;
use dirac_mti::limit::{run_limit_study, LimitError};
use dirac_mti::refcache::ReferenceStore;
use dirac_mti::report;
use dirac_mti::sweep::run_sweep;

/// Exit codes: 0 success, 1 config error, 2 numerical failure, 3
/// reference-validity gate tripped.
const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_GATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dirac-mti",
    about = "Spectral solvers for the 1D two-component Dirac equation: parameter sweeps, reference management and limiting-model studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an error sweep over (epsilon, h, tau) and write a CSV report.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: machine parallelism).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: config's output_dir, else ".").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the limiting-model study and write the error time series.
    LimitStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build (or refresh) the reference snapshots for a config.
    MakeRef {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suite and report pass/fail per check.
    Validate,
}

fn die(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load(
    config_path: &Path,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(RunConfig, dirac_mti::config::ResolvedConfig, PathBuf), String> {
    let mut config = RunConfig::from_path(config_path).map_err(|e| e.to_string())?;
    if let Some(t) = threads {
        config.threads = t;
    }
    if let Some(o) = out {
        config.output_dir = Some(o);
    }
    let resolved = config.resolve().map_err(|e| e.to_string())?;
    let out_dir = config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((config, resolved, out_dir))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Sweep {
            config,
            threads,
            out,
        } => {
            let (config, resolved, out_dir) = match load(&config, threads, out) {
                Ok(v) => v,
                Err(e) => return die(EXIT_CONFIG, e),
            };
            let spec = match &resolved.reference {
                Some(r) => r.clone(),
                None => return die(EXIT_CONFIG, "sweep requires a reference spec in the config"),
            };
            let store = ReferenceStore::resolve(Some(&out_dir.join("ref-cache")));
            let report = match run_sweep(&config, &resolved, &store, &out_dir) {
                Ok(r) => r,
                Err(e) => return die(EXIT_NUMERICAL, e),
            };
            let notes = vec![format!(
                "reference: h_e={} tau_e={}",
                spec.grid.h(),
                spec.tau
            )];
            let csv = report::sweep_csv(&report, &notes);
            let path = out_dir.join("sweep.csv");
            if let Err(e) = std::fs::create_dir_all(&out_dir)
                .and_then(|_| std::fs::write(&path, &csv))
            {
                return die(EXIT_CONFIG, format!("cannot write {}: {e}", path.display()));
            }
            println!("{csv}");
            eprintln!("wrote {}", path.display());
            if report.any_failed {
                return die(EXIT_NUMERICAL, "one or more cells failed numerically");
            }
            if report.any_gated {
                eprintln!(
                    "note: some cells fell below the reference-validity floor; see report header"
                );
                return ExitCode::from(EXIT_GATE);
            }
            ExitCode::SUCCESS
        }
        Command::LimitStudy {
            config,
            threads,
            out,
        } => {
            let (_config, resolved, out_dir) = match load(&config, threads, out) {
                Ok(v) => v,
                Err(e) => return die(EXIT_CONFIG, e),
            };
            let series = match run_limit_study(&resolved) {
                Ok(s) => s,
                Err(LimitError::Config(msg)) => return die(EXIT_CONFIG, msg),
                Err(e) => return die(EXIT_NUMERICAL, e),
            };
            let notes = vec![format!(
                "domain=({},{}) M={} tau={} T={}",
                resolved.domain.a,
                resolved.domain.b,
                resolved.grids[0].len(),
                resolved.taus[0],
                resolved.final_time
            )];
            let csv = report::limit_csv(&series, &notes);
            let path = out_dir.join("limit_study.csv");
            if let Err(e) = std::fs::create_dir_all(&out_dir)
                .and_then(|_| std::fs::write(&path, &csv))
            {
                return die(EXIT_CONFIG, format!("cannot write {}: {e}", path.display()));
            }
            println!("{csv}");
            eprintln!("wrote {}", path.display());
            if resolved.emit_plot_data {
                if let Err(e) = report::write_plot_data(&series, &out_dir.join("plot")) {
                    return die(EXIT_CONFIG, format!("cannot write plot data: {e}"));
                }
            }
            ExitCode::SUCCESS
        }
        Command::MakeRef { config, out } => {
            let (_config, resolved, out_dir) = match load(&config, None, out) {
                Ok(v) => v,
                Err(e) => return die(EXIT_CONFIG, e),
            };
            let spec = match &resolved.reference {
                Some(r) => r.clone(),
                None => {
                    return die(EXIT_CONFIG, "make-ref requires a reference spec in the config")
                }
            };
            let store = ReferenceStore::resolve(Some(&out_dir.join("ref-cache")));
            for &eps in &resolved.epsilons {
                let initial = resolved.case.initial_spinor(spec.grid);
                match store.ensure(
                    spec.grid,
                    eps,
                    spec.tau,
                    &spec.snapshot_times,
                    resolved.case.sampler(),
                    &initial,
                ) {
                    Ok(refs) => {
                        for r in refs {
                            println!(
                                "eps={eps} t={}: snapshot ready (self-convergence {})",
                                r.t,
                                r.discrepancy
                                    .map(|d| format!("{d:.3e}"))
                                    .unwrap_or_else(|| "unknown".into())
                            );
                        }
                    }
                    Err(e) => return die(EXIT_NUMERICAL, e),
                }
            }
            eprintln!("reference cache at {}", store.dir().display());
            ExitCode::SUCCESS
        }
        Command::Validate => {
            let results = dirac_mti_core::validate::run_invariant_suite();
            let mut failed = 0;
            for r in &results {
                println!(
                    "{} {:40} {}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                if !r.pass {
                    failed += 1;
                }
            }
            if failed > 0 {
                return die(EXIT_NUMERICAL, format!("{failed} invariant checks failed"));
            }
            println!("all {} checks passed", results.len());
            ExitCode::SUCCESS
        }
    }
}
