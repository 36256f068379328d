use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ctq_cli::commands::{
    cmd_bound, cmd_chain, cmd_curve, cmd_example2, cmd_measure, cmd_monogamy_random,
    cmd_monogamy_state, envelope_step, grid_points, read_state_file, CurveFamily,
};
use ctq_cli::output::{emit, to_csv, to_json};
use ctq_cli::{accept, Result};
use ctq_core::measures::set_mu_perturbation;

#[derive(Parser)]
#[command(name = "ctq", version, about = "Total q-concurrence measures, bounds and figure data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Write output atomically to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

#[derive(Args)]
struct Scale {
    /// Report in units of μ(d,q) = 1 (default).
    #[arg(long, conflicts_with = "raw")]
    normalized: bool,
    /// Report unnormalized values.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct Range {
    #[arg(long)]
    from: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    to: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Every applicable measure of a state file.
    Measure {
        state: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[command(flatten)]
        scale: Scale,
        #[command(flatten)]
        common: Common,
    },
    /// Trace-norm lower bound of a state file.
    Bound {
        state: PathBuf,
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Isotropic-family curve: raw ζ, envelope, bound.
    Isotropic {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        scale: Scale,
        #[command(flatten)]
        common: Common,
    },
    /// Two-qubit Werner curve with the EoF column.
    Werner {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        scale: Scale,
        #[command(flatten)]
        common: Common,
    },
    /// Monogamy residual for a state file, random qubit states, or the example state.
    Monogamy {
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Sample this many random pure states instead of reading a file.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 3)]
        qubits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// The generalized-Schmidt example; --gamma is its exponent α.
        #[arg(long)]
        example2: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Chain-state sweep over θ ∈ [from, to].
    Chain {
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        to: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite; exit 0 iff every criterion passes.
    Accept {
        #[arg(long, hide = true)]
        perturb_mu: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn curve(family: CurveFamily, d: usize, q: f64, range: Range, scale: Scale, common: Common) -> Result<()> {
    let from = range.from.unwrap_or(match family {
        CurveFamily::Isotropic => 1.0 / d as f64,
        CurveFamily::Werner => 0.5,
    });
    let xs = grid_points(from, range.to, range.step)?;
    let c = cmd_curve(family, d, q, &xs, envelope_step()?, !scale.raw)?;
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => c.to_csv()?,
        Format::Json => to_json(&c.rows)?,
    };
    emit(common.out.as_deref(), &text)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Measure { state, q, alpha, scale, common } => {
            let report = cmd_measure(&read_state_file(&state)?, q, alpha, !scale.raw)?;
            emit(common.out.as_deref(), &to_json(&report)?)?;
        }
        Command::Bound { state, q, common } => {
            emit(common.out.as_deref(), &to_json(&cmd_bound(&read_state_file(&state)?, q)?)?)?;
        }
        Command::Isotropic { d, q, range, scale, common } => curve(CurveFamily::Isotropic, d, q, range, scale, common)?,
        Command::Werner { d, q, range, scale, common } => curve(CurveFamily::Werner, d, q, range, scale, common)?,
        Command::Monogamy { state, q, gamma, random, qubits, seed, example2, common } => {
            let text = if example2 {
                to_json(&cmd_example2(accept::reference_nu(), q, gamma)?)?
            } else if let Some(count) = random {
                to_json(&cmd_monogamy_random(qubits, count, q, gamma, seed)?)?
            } else {
                let path = state.ok_or_else(|| {
                    ctq_cli::CliError::Config("give a state file, --random N or --example2".into())
                })?;
                to_json(&cmd_monogamy_state(&read_state_file(&path)?, q, gamma)?)?
            };
            emit(common.out.as_deref(), &text)?;
        }
        Command::Chain { q, gamma, from, to, step, common } => {
            let thetas = grid_points(from, to, step)?;
            let (header, rows) = cmd_chain(&thetas, q, gamma)?;
            emit(common.out.as_deref(), &to_csv(&header, &rows)?)?;
        }
        Command::Accept { perturb_mu, common } => {
            if let Some(delta) = perturb_mu {
                set_mu_perturbation(delta);
            }
            let report = accept::run_all();
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            emit(common.out.as_deref(), &to_json(&report)?)?;
            return Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
