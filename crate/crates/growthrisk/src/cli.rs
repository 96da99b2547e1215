use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::Settings;
use crate::error::CliError;
use crate::figures::{reproduce_figures, FigureConfig};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "growthrisk", version, about = "Growth-optimal portfolios under VaR/ES risk control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// Flat TOML file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// var, es or custom (custom reads atoms/segments from --config).
    #[arg(long)]
    measure: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long = "T", allow_negative_numbers = true)]
    horizon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal payoff, thresholds and risk as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Rows of the payoff table.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Efficient frontier as CSV, with the Kelly point last.
    Frontier {
        #[command(flatten)]
        common: Common,
        /// lo:hi:N followed by log or lin.
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
    },
    /// φ and its convex envelope as CSV.
    Envelope {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<usize>,
        /// Samples of the numeric hull for custom measures.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Simulated hedging paths (--out is a directory).
    Path {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-paths")]
        n_paths: Option<usize>,
        #[arg(long = "n-steps")]
        n_steps: Option<usize>,
        #[arg(long = "record-every")]
        record_every: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        exclusion: Option<f64>,
    },
    /// Oracle checks; exits 3 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "quick")]
        suite: String,
        #[arg(long = "n-samples")]
        n_samples: Option<usize>,
        #[arg(long = "n-paths")]
        n_paths: Option<usize>,
    },
    /// Figure data at r = 0.05, θ = 0.4, T = 1 (--out is a directory).
    Figures {
        #[command(flatten)]
        common: Common,
    },
}

fn settings(c: &Common) -> Result<Settings, CliError> {
    let file = match &c.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let flags = Settings {
        measure: c.measure.clone(),
        alpha: c.alpha,
        lambda: c.lambda,
        r: c.r,
        theta: c.theta,
        sigma: c.sigma,
        horizon: c.horizon,
        x0: c.x0,
        seed: c.seed,
        out: c.out.clone(),
        ..Default::default()
    };
    Ok(file.overridden_by(&flags))
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Solve { common, points } => {
            let s = settings(&common)?.overridden_by(&Settings { points, ..Default::default() });
            commands::solve(&s).map(drop)
        }
        Command::Frontier { common, lambda_grid } => {
            let s = settings(&common)?.overridden_by(&Settings { lambda_grid, ..Default::default() });
            commands::frontier(&s).map(drop)
        }
        Command::Envelope { common, points, grid } => {
            let s = settings(&common)?.overridden_by(&Settings { points, grid, ..Default::default() });
            commands::envelope(&s).map(drop)
        }
        Command::Path { common, n_paths, n_steps, record_every, exclusion } => {
            let s = settings(&common)?.overridden_by(&Settings {
                n_paths,
                n_steps,
                record_every,
                exclusion,
                ..Default::default()
            });
            let sum = commands::path(&s)?;
            eprintln!(
                "{} paths × {} steps: relative RMSE {:.3e}, {} excluded",
                sum.n_paths, sum.n_steps, sum.relative_rmse, sum.excluded
            );
            Ok(())
        }
        Command::Verify { common, suite, n_samples, n_paths } => {
            let s = settings(&common)?.overridden_by(&Settings { n_samples, n_paths, ..Default::default() });
            commands::verify(&s, &suite).map(drop)
        }
        Command::Figures { common } => {
            let s = settings(&common)?;
            let mut cfg = FigureConfig::standard(s.out.clone().unwrap_or_else(|| PathBuf::from("figures")));
            if s.r.is_some() || s.theta.is_some() || s.sigma.is_some() || s.horizon.is_some() || s.x0.is_some() {
                cfg.params = s.params()?;
            }
            let files = parallel::with_pool(|| reproduce_figures(&cfg))?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand. Returns the
/// process exit code: 0 success, 1 configuration error, 2 numerical failure,
/// 3 verification failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("growthrisk: {e}");
            e.exit_code()
        }
    }
}
