use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ecoroute::batch::{
    cmd_compare, cmd_run, cmd_validate, parse_seeds, CompareRequest, InputPaths, RunRequest,
};
use ecoroute::metrics::SampleUnit;
use ecoroute::sim::ScenarioId;
use ecoroute::state::DisseminationMode;

#[derive(Parser)]
#[command(
    name = "ecoroute",
    version,
    about = "Eco-routing traffic simulation over intelligent intersections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every input file and report all problems.
    Validate {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run scenarios for a list of seeds, one directory per run.
    Run {
        #[command(flatten)]
        inputs: InputArgs,
        /// Scenario config (TOML); per-run scenario and seed are overridden.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated scenario ids, e.g. S1,S5. Default: all five.
        #[arg(long, value_delimiter = ',', value_parser = parse_scenario)]
        scenario: Vec<ScenarioId>,
        /// Seeds such as 1-10 or 1,4,9.
        #[arg(long, value_parser = parse_seed_list)]
        seeds: Option<Seeds>,
        #[arg(long)]
        out: PathBuf,
        /// idealized or hop_gossip(k)
        #[arg(long, value_parser = parse_dissemination)]
        dissemination: Option<DisseminationMode>,
        /// Seconds without movement before a run is aborted.
        #[arg(long)]
        gridlock_horizon: Option<u32>,
    },
    /// Compare run directories against a baseline scenario.
    Compare {
        /// Run directories or batch output directories.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "S1")]
        baseline: String,
        /// Where to write the comparison tables and series.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Observation unit of the t-tests.
        #[arg(long, value_enum, default_value_t = Unit::Trip)]
        unit: Unit,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    network: PathBuf,
    /// Node coordinates; node references in the network are checked against it.
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(long)]
    demand: PathBuf,
    #[arg(long)]
    rates: PathBuf,
    #[arg(long)]
    fleet: Option<PathBuf>,
}

impl From<InputArgs> for InputPaths {
    fn from(a: InputArgs) -> Self {
        InputPaths {
            network: a.network,
            nodes: a.nodes,
            demand: a.demand,
            rates: a.rates,
            fleet: a.fleet,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Trip,
    Run,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seed_list(s: &str) -> Result<Seeds, String> {
    parse_seeds(s).map(Seeds)
}

fn parse_dissemination(s: &str) -> Result<DisseminationMode, String> {
    DisseminationMode::parse(s).ok_or_else(|| format!("unknown dissemination mode `{s}`"))
}

fn parse_scenario(s: &str) -> Result<ScenarioId, String> {
    ScenarioId::parse(s).ok_or_else(|| format!("unknown scenario `{s}`, expected S1..S5"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Validate { inputs, config } => {
            let report = cmd_validate(&inputs.into(), config.as_deref());
            if report.is_ok() {
                println!("ok");
                return ExitCode::SUCCESS;
            }
            eprint!("{report}");
            return ExitCode::from(1);
        }
        Command::Run {
            inputs,
            config,
            scenario,
            seeds,
            out,
            dissemination,
            gridlock_horizon,
        } => cmd_run(&RunRequest {
            inputs: inputs.into(),
            config,
            scenarios: scenario,
            seeds: seeds.map(|s| s.0).unwrap_or_default(),
            out,
            dissemination,
            gridlock_horizon_s: gridlock_horizon,
        })
        .map(|dirs| {
            for d in dirs {
                println!("{}", d.display());
            }
        }),
        Command::Compare {
            runs,
            baseline,
            out,
            unit,
        } => cmd_compare(&CompareRequest {
            runs,
            baseline,
            out,
            unit: match unit {
                Unit::Trip => SampleUnit::Trip,
                Unit::Run => SampleUnit::Run,
            },
        })
        .map(|table| {
            println!("scenario,metric,baseline_mean,mean,change_pct");
            for c in &table.percent {
                println!(
                    "{},{},{:.4},{:.4},{:.2}",
                    c.scenario, c.metric, c.baseline_mean, c.mean, c.change_pct
                );
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
