//! `qplane`: evaluate q-Bessel and Green functions, run the verification
//! suites and apply the Green operator on the quantum plane.

mod commands;
mod config;
mod error;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qplane::verify::Suite;
use qplane::PrecisionMode;

use crate::commands::{Function, Outcome};
use crate::config::{Format, Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qplane",
    version,
    about = "Harmonic analysis on the quantum plane"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Deformation parameter, 0 < q < 1.
    #[arg(long, global = true)]
    q: Option<f64>,

    /// Window half-width.
    #[arg(long = "L", global = true)]
    half_width: Option<i64>,

    /// Relative truncation tolerance for series and window tails.
    #[arg(long, global = true)]
    series_tol: Option<f64>,

    /// Pass/fail tolerance for checks without a sharper one.
    #[arg(long, global = true)]
    assert_tol: Option<f64>,

    /// Imaginary shift for spectral sums at a pole.
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// `double` or `extended`.
    #[arg(long, global = true)]
    precision: Option<PrecisionMode>,

    /// `csv` or `json`.
    #[arg(long, global = true)]
    format: Option<Format>,

    /// Seed for random test vectors.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Constant in the q-Neumann function.
    #[arg(long = "cq", global = true, allow_hyphen_values = true)]
    c_q: Option<f64>,

    /// Config file with key=value lines.
    #[arg(long, global = true, env = "QPLANE_CONFIG")]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Include wall-clock times (makes output run-dependent).
    #[arg(long, global = true)]
    timings: bool,

    /// Accept q above 1 − 1e-6.
    #[arg(long, global = true)]
    allow_q_near_one: bool,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            q: self.q,
            half_width: self.half_width,
            series_tol: self.series_tol,
            assert_tol: self.assert_tol,
            epsilon: self.epsilon,
            precision: self.precision,
            format: self.format,
            seed: self.seed,
            c_q: self.c_q,
            allow_q_near_one: self.allow_q_near_one.then_some(true),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate 𝒥, 𝒥_s, 𝒩, 𝒢 or the spectral Green function on a point list.
    Eval {
        #[arg(long = "fn", value_enum)]
        function: Function,
        /// Order for `Js`.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        s: i64,
        /// Arguments x for `J` and `Js` (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Spectral parameter for `N`, `G` and `spectral-G`.
        #[arg(long)]
        p: Option<f64>,
        /// Radii ρ for `N`, `G` and `spectral-G` (comma separated).
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
    /// Numeric spectrum of one sector of R against q^(2t).
    Spectrum {
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        s: i64,
    },
    /// Apply 𝒢ᵖ(R) to a vector through the e_ts eigenbasis.
    ApplyGreen {
        /// Spectral parameter.
        #[arg(long)]
        p: f64,
        /// Coefficient of e_a⊗e_b as `a,b,re[,im]`; repeatable. Without
        /// entries a random vector is drawn from the seed.
        #[arg(long = "entry", allow_hyphen_values = true)]
        entries: Vec<String>,
        /// Number of random entries when no --entry is given.
        #[arg(long, default_value_t = 4)]
        terms: usize,
        /// Compare with the numeric eigendecomposition of the sector matrices.
        #[arg(long)]
        check: bool,
    },
    /// Fit the Neumann constant to the spectral representation.
    EstimateCq {
        /// Spectral parameters of the calibration grid.
        #[arg(long, value_delimiter = ',', default_value = "0.37,0.7,2.3")]
        p: Vec<f64>,
        /// Lattice indices i of the grid points ρ = q^(2i).
        #[arg(
            long = "rho-index",
            value_delimiter = ',',
            default_value = "-1,0,1,2,3,4",
            allow_hyphen_values = true
        )]
        rho_index: Vec<i64>,
        /// Explicit ρ values (replaces --rho-index).
        #[arg(long, value_delimiter = ',')]
        rho: Vec<f64>,
        /// Largest acceptable relative residual of the fit.
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        /// Repeat the fit for each of these q.
        #[arg(long = "q-schedule", value_delimiter = ',')]
        q_schedule: Vec<f64>,
    },
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.global.config {
        Some(path) => Some(Overrides::read(path)?),
        None => None,
    };
    let cfg = RunConfig::resolve(file.as_ref(), &cli.global.overrides())?;
    if cfg.q > config::Q_LIMIT {
        eprintln!(
            "warning: q = {} is close to 1; series lengths grow like 1/(1−q)",
            cfg.q
        );
    }
    let timings = cli.global.timings;
    let outcome: Outcome = match &cli.command {
        Command::Eval {
            function,
            s,
            x,
            p,
            rho,
        } => commands::eval(&cfg, *function, *s, x, *p, rho)?,
        Command::Verify { suite } => commands::verify(&cfg, *suite, timings)?,
        Command::Spectrum { s } => commands::spectrum(&cfg, *s)?,
        Command::ApplyGreen {
            p,
            entries,
            terms,
            check,
        } => commands::apply_green(&cfg, *p, entries, *terms, *check)?,
        Command::EstimateCq {
            p,
            rho_index,
            rho,
            threshold,
            q_schedule,
        } => {
            if q_schedule.is_empty() {
                commands::estimate_cq(&cfg, p, rho, rho_index, *threshold)?
            } else {
                commands::estimate_cq_schedule(
                    &cfg, q_schedule, p, rho, rho_index, *threshold, timings,
                )?
            }
        }
    };
    let mut buf = Vec::new();
    outcome.table.write(&cfg, &mut buf)?;
    match &cli.global.out {
        Some(path) => std::fs::write(path, &buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
