//! `study` — runs convergence studies from configuration files.
//!
//! Exit codes: 0 pass, 2 fail, 3 inconclusive, 1 usage/configuration/IO
//! error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infmass::geometry::DomainSpec;
use infmass::study::{check_preconditions, emit_outputs, identity_residuals, run_study, StudyConfig};

#[derive(Parser)]
#[command(name = "study", version, about = "Convergence studies for Dirac operators with a large exterior mass")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory (overrides study.output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent cells (overrides study.workers).
        #[arg(long)]
        workers: Option<usize>,
        /// Random seed (overrides study.seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse a configuration and check its preconditions.
    Validate { config: PathBuf },
    /// Print the boundary-identity residuals on the unit disk.
    Identities {
        /// Quadrature order.
        #[arg(long, default_value_t = 128)]
        order: usize,
    },
}

fn load(path: &PathBuf) -> Result<StudyConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    StudyConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Run { config, out, workers, seed } => {
            let mut cfg = load(&config)?;
            if let Some(o) = out {
                cfg.output = o.to_string_lossy().into_owned();
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            check_preconditions(&cfg).map_err(|e| e.to_string())?;
            let report = run_study(&cfg).map_err(|e| e.to_string())?;
            let files = emit_outputs(&report, &PathBuf::from(&cfg.output)).map_err(|e| e.to_string())?;
            println!("{}: {} (slope {:.4}, floor {:.3e}, {} points fitted)", report.id, report.verdict, report.slope, report.floor, report.fitted_points());
            for f in &report.failures {
                println!("  failure: {f}");
            }
            for f in files {
                println!("  wrote {}", f.display());
            }
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            check_preconditions(&cfg).map_err(|e| e.to_string())?;
            println!("{}: ok ({} study, hash {})", config.display(), cfg.kind, cfg.hash());
            Ok(0)
        }
        Command::Identities { order } => {
            let disk = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
            println!("{:>6} {:>24} {:>14} {:>14}", "order", "partial integration", "energy", "κ-sentinel");
            let mut q = 8;
            while q <= order.max(8) {
                let r = identity_residuals(&disk, q).map_err(|e| e.to_string())?;
                println!("{:>6} {:>24.3e} {:>14.3e} {:>14.3e}", q, r.partial_integration, r.energy, r.sentinel);
                q *= 2;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1 (clap's default of 2 means "fail" here).
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
