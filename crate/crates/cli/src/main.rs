use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use macsim::{Execution, ScenarioKind, SweepSpec};
use macsim_cli::config::parse_technique_list;
use macsim_cli::{cmd_analytic, cmd_compare, cmd_simulate, load_config, CliError, Config, Outcome, Overrides};

/// Analytic models and simulation of ALOHA, slotted ALOHA, CSMA/CA, TDMA and FDMA.
#[derive(Parser)]
#[command(name = "macsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form curves and write `technique,scenario,G,T,D,saturated`.
    Analytic {
        #[command(flatten)]
        common: Common,
        /// delay-vs-throughput, delay-vs-load or throughput-vs-load.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run the simulator for every (technique, load, seed) and write one stats row each.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Single seed replacing the configured seed list.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-check an analytic CSV against a simulation CSV.
    Compare {
        analytic: PathBuf,
        sim: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration (a manifest written by an earlier run also works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated technique names.
    #[arg(long)]
    techniques: Option<String>,
    /// start:stop:points:lin|log
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

fn prepare(common: &Common, scenario: Option<&str>, seed: Option<u64>) -> Result<(Config, Execution), CliError> {
    // validate command-line values before touching the config file
    let techniques = match &common.techniques {
        Some(list) => Some(parse_technique_list(&list.split(',').collect::<Vec<_>>())?),
        None => None,
    };
    let sweep = common.sweep.as_deref().map(str::parse::<SweepSpec>).transpose()?;
    let scenario = scenario.map(|s| s.parse::<ScenarioKind>().map_err(CliError::Usage)).transpose()?;
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    Overrides { scenario, techniques, sweep, seed }.apply(&mut config);
    let exec = if common.sequential { Execution::Sequential } else { Execution::Parallel };
    Ok((config, exec))
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Analytic { common, scenario } => {
            let (config, exec) = prepare(&common, scenario.as_deref(), None)?;
            cmd_analytic(&config, &common.out, exec)
        }
        Command::Simulate { common, seed } => {
            let (config, exec) = prepare(&common, None, seed)?;
            cmd_simulate(&config, &common.out, exec)
        }
        Command::Compare { analytic, sim, out } => cmd_compare(&analytic, &sim, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            let _ = std::io::stdout().write_all(outcome.text.as_bytes());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("macsim: {e}");
            ExitCode::from(&e)
        }
    }
}
