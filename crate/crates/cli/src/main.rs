mod commands;
mod report;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{UsageError, VortexArgs};

#[derive(Parser)]
#[command(name = "adhm", version, about = "ADHM moment maps, strata, F2 cones, series and torus vortices")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the moment-map identities and equivariance on random data.
    VerifyIdentities {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow random configurations to zeros of the moment map.
    SolveMoment {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint spectrum and partition of a configuration read from JSON.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = adhm_core::zero_flow::SPECTRUM_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random chain maps and the exactness of their cone triangles.
    ConeDemo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest chain-group dimension per degree.
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficients of the genus-g series on a window of degrees.
    SwSeries {
        #[arg(long)]
        genus: u32,
        /// Inclusive degree window `A:B`.
        #[arg(long, allow_hyphen_values = true, value_parser = commands::parse_window)]
        window: (i64, i64),
        /// Also report the sum of all coefficients.
        #[arg(long)]
        at_one: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide δ-stability of a bundle datum read from JSON.
    Stability {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the vortex equations on a square torus.
    Vortex {
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
        degree: i64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Side length of the torus.
        #[arg(long, default_value_t = 2.0 * PI)]
        side: f64,
        #[arg(long, default_value_t = adhm_core::vortex::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 40_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the solved state.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the report instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<(report::RunReport, Option<PathBuf>), UsageError> {
    Ok(match cmd {
        Command::VerifyIdentities { k, samples, seed, out } => (commands::verify_identities(k, samples, seed)?, out),
        Command::SolveMoment { k, r, runs, tol, max_iter, seed, out } => {
            (commands::solve_moment(r, k, runs, tol, max_iter, seed)?, out)
        }
        Command::Spectrum { input, tol, out } => (commands::spectrum(&input, tol)?, out),
        Command::ConeDemo { seed, size, trials, out } => (commands::cone_demo(seed, size, trials)?, out),
        Command::SwSeries { genus, window, at_one, out } => (commands::sw_series_cmd(genus, window, at_one)?, out),
        Command::Stability { input, out } => (commands::stability(&input)?, out),
        Command::Vortex { grid, degree, lambda, side, tol, max_iter, seed, out, report } => {
            let args = VortexArgs { grid, degree, lambda, side, tol, max_iter, seed, out: out.as_deref() };
            (commands::vortex(&args)?, report)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (rep, out) = match run(cli.command) {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let text = rep.to_json();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    ExitCode::from(if rep.pass { 0 } else { 1 })
}
