use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use indosc::commands::{cmd_certify, cmd_construct, cmd_solve, cmd_sweep, CmdOutput};
use indosc::config::{CommonOpts, RunConfig};
use indosc::report::compare_against;

/// Construct, certify, solve and sweep piecewise-trigonometric forcings
/// that induce oscillation in a non-oscillatory second-order equation.
#[derive(Parser)]
#[command(name = "indosc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the constructed forcing: amplitudes, admissible
    /// epsilon and the underflow horizon.
    Construct {
        #[command(flatten)]
        opts: CommonOpts,
        /// Number of leading (c_m, d_m) amplitude pairs to report.
        #[arg(long, default_value_t = 8)]
        pairs: u32,
    },
    /// Check every lemma hypothesis over the index range; exit 0 iff
    /// the verdict is certified.
    Certify {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Sample z, h, ODE residuals and decay envelopes on the
    /// deterministic grid.
    Solve {
        #[command(flatten)]
        opts: CommonOpts,
        /// Degenerate diagnostic: force q = 0, yielding identically
        /// zero solution columns on the same grid.
        #[arg(long)]
        zero_q: bool,
    },
    /// Certify a grid of (alpha/beta ratio, epsilon multiplier) cells.
    Sweep {
        #[command(flatten)]
        opts: CommonOpts,
        /// Comma-separated alpha/beta ratios.
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        /// Comma-separated multipliers applied to the admissible
        /// epsilon of each ratio.
        #[arg(long = "eps-multipliers", value_delimiter = ',')]
        eps_multipliers: Vec<f64>,
    },
}

/// Writes or prints the report, then runs the optional comparison.
/// Returns the process exit code.
fn dispose(cfg: &RunConfig, out: &CmdOutput) -> Result<ExitCode> {
    match &cfg.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
            }
            fs::write(path, &out.content)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => print!("{}", out.content),
    }
    if let Some(reference) = &cfg.compare {
        if !compare_against(&out.content, cfg.format, reference)? {
            eprintln!(
                "comparison failed: data body differs from {}",
                Path::new(reference).display()
            );
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Construct { opts, pairs } => {
            let cfg = opts.resolve()?;
            let out = cmd_construct(&cfg, pairs)?;
            dispose(&cfg, &out)
        }
        Command::Certify { opts } => {
            let cfg = opts.resolve()?;
            let out = cmd_certify(&cfg)?;
            dispose(&cfg, &out)
        }
        Command::Solve { opts, zero_q } => {
            let cfg = opts.resolve()?;
            let out = cmd_solve(&cfg, zero_q)?;
            dispose(&cfg, &out)
        }
        Command::Sweep {
            opts,
            ratios,
            eps_multipliers,
        } => {
            let cfg = opts.resolve()?;
            let out = cmd_sweep(&cfg, &ratios, &eps_multipliers)?;
            dispose(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
