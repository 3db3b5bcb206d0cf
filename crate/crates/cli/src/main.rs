use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aggshare_cli::commands::{cmd_audit, cmd_nash, cmd_share, cmd_surface};
use aggshare_cli::report::Report;
use aggshare_cli::scenario::{self, Overrides};
use aggshare_cli::{AppError, DEFAULT_SEED};
use aggshare_core::MechanismKind;

/// Proportional cost sharing and contract-game analysis for
/// renewable-energy aggregates.
#[derive(Parser)]
#[command(name = "aggshare", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cost shares and axiom verdicts for one deviation profile
    Share {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated per-supplier deviations d_i = c_i - w_i
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        deviation: Vec<f64>,
    },
    /// Certified pure-strategy epsilon-Nash profiles of the contract game
    Nash {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Payoff surface (two suppliers) or per-axis slices, plot-ready
    Surface {
        #[command(flatten)]
        common: CommonArgs,
        /// 1-based supplier index to slice along
        #[arg(long)]
        axis: Option<usize>,
        /// Fixed contracts of the other suppliers for --axis (comma separated)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        fixed: Option<Vec<f64>>,
    },
    /// Randomized axiom audit plus the structured IR-violation search
    Audit {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of randomized deviation profiles
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: PathBuf,
    /// Seed for randomized commands (fixed default keeps reports reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's contract grid step
    #[arg(long)]
    grid_step: Option<f64>,
    /// Override the scenario's epsilon-Nash tolerance
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override the scenario's mechanism
    #[arg(long, value_enum)]
    mechanism: Option<MechanismArg>,
    /// Write the machine-readable report to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MechanismArg {
    Tilde,
    Star,
}

impl MechanismArg {
    fn kind(self) -> MechanismKind {
        match self {
            MechanismArg::Tilde => MechanismKind::Tilde,
            MechanismArg::Star => MechanismKind::Star,
        }
    }
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mechanism: self.mechanism.map(MechanismArg::kind),
            grid_step: self.grid_step,
            epsilon: self.epsilon,
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    // Echo the invocation minus the output destination, which is not part
    // of the computation; reports stay byte-identical per (scenario, seed).
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    let mut echo_parts = Vec::with_capacity(args.len());
    let mut skip_next = false;
    for arg in args.drain(..) {
        if skip_next {
            skip_next = false;
            continue;
        }
        if arg == "--out" {
            skip_next = true;
            continue;
        }
        if arg.starts_with("--out=") {
            continue;
        }
        echo_parts.push(arg);
    }
    let echo = echo_parts.join(" ");
    match dispatch(cli, &echo) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli, echo: &str) -> Result<i32, AppError> {
    match cli.command {
        Cmd::Share { common, deviation } => {
            let loaded = scenario::load(&common.scenario, &common.overrides())?;
            let report = cmd_share(&loaded, &deviation, echo)?;
            emit(&report, &common.out)?;
            Ok(0)
        }
        Cmd::Nash { common } => {
            let loaded = scenario::load(&common.scenario, &common.overrides())?;
            let (report, count) = cmd_nash(&loaded, echo)?;
            emit(&report, &common.out)?;
            if count == 0 {
                eprintln!("warning: no epsilon-Nash profile certified on this grid");
                Ok(4)
            } else {
                Ok(0)
            }
        }
        Cmd::Surface {
            common,
            axis,
            fixed,
        } => {
            let loaded = scenario::load(&common.scenario, &common.overrides())?;
            let report = cmd_surface(&loaded, axis, fixed.as_deref(), echo)?;
            emit(&report, &common.out)?;
            Ok(0)
        }
        Cmd::Audit { common, trials } => {
            let loaded = scenario::load(&common.scenario, &common.overrides())?;
            let seed = common.seed.unwrap_or(DEFAULT_SEED);
            let report = cmd_audit(&loaded, trials, seed, echo)?;
            emit(&report, &common.out)?;
            Ok(0)
        }
    }
}

fn emit(report: &Report, out: &Option<PathBuf>) -> Result<(), AppError> {
    print!("{}", report.human());
    if let Some(path) = out {
        fs::write(path, report.machine()).map_err(|source| AppError::Output {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}
