//! `fbar`: design and heralding analysis for FBAR piezo-optomechanical transducers.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 no physical
//! synthesis, 3 I/O failure, 4 insufficient Monte Carlo statistics.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod report;
mod sweep;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbar_core::herald::Protocol;
use fbar_core::matching::MatchingObjective;
use fbar_core::optomech::Topology;

use crate::commands::{cases, McOptions};
use crate::config::{Config, TopologySelection};
use crate::error::{CliError, Result};
use crate::report::{RunReport, Table};
use crate::sweep::{Scale, SweepSpec, Variable};

#[derive(Parser)]
#[command(name = "fbar", version, about = "Matching-network synthesis, figures of merit and entanglement heralding for FBAR transducers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Device and protocol configuration (flat key = value or JSON). Defaults to the reference device.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    objective: Option<ObjectiveArg>,

    /// Defaults to both for synth and fom, otherwise to the configuration's `topology`.
    #[arg(long, global = true, value_enum)]
    topology: Option<TopologyArg>,

    #[arg(long, global = true, value_enum)]
    protocol: Option<ProtocolArg>,

    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the matching network (both objectives and topologies by default).
    Synth,
    /// Conversion efficiency, bandwidth and added noise.
    Fom,
    /// Heralding probabilities, rates and fidelities.
    Herald,
    /// Sweep one parameter and write CSV.
    Sweep(SweepArgs),
    /// Check the analytic fidelity against a Monte Carlo simulation.
    Mc(McArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    variable: Variable,
    /// First grid value, in the variable's unit (mK, photons, MHz or probability).
    #[arg(long, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, allow_negative_numbers = true)]
    stop: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long, value_enum, default_value = "linear")]
    scale: Scale,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write one JSON record per simulated trial (slow; for debugging).
    #[arg(long)]
    event_log: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MaxEff,
    MinNoise,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    OneRing,
    TwoRing,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Type1,
    Type2,
    Blue,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Structured,
}

impl ObjectiveArg {
    fn objectives(self) -> Vec<MatchingObjective> {
        match self {
            ObjectiveArg::MaxEff => vec![MatchingObjective::MaximizeEfficiency],
            ObjectiveArg::MinNoise => vec![MatchingObjective::MinimizeNoise],
            ObjectiveArg::Both => MatchingObjective::ALL.to_vec(),
        }
    }
}

impl TopologyArg {
    fn selection(self) -> TopologySelection {
        match self {
            TopologyArg::OneRing => TopologySelection::One(Topology::OneRing),
            TopologyArg::TwoRing => TopologySelection::One(Topology::TwoRing),
            TopologyArg::Both => TopologySelection::Both,
        }
    }
}

impl ProtocolArg {
    fn protocol(self) -> Protocol {
        match self {
            ProtocolArg::Type1 => Protocol::TypeI,
            ProtocolArg::Type2 => Protocol::TypeII,
            ProtocolArg::Blue => Protocol::BlueDetuned,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Config::parse(&text, &path.display().to_string())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    let result = match &cli.out {
        Some(path) => create(path)?.write_all(text.as_bytes()).map_err(|source| (path.clone(), source)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| (PathBuf::from("<stdout>"), source)),
    };
    result.map_err(|(path, source)| CliError::Io { path, source })
}

fn render(cli: &Cli, table: &Table, report: &RunReport) -> Result<String> {
    match cli.format {
        Format::Table => Ok(table.render_text()),
        Format::Csv => table.render_csv(),
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let objectives = cli.objective.unwrap_or(ObjectiveArg::Both).objectives();
    // Design tables cover both topologies; heralding follows the configured device.
    let default_topology = match cli.command {
        Command::Synth | Command::Fom => TopologySelection::Both,
        _ => config.topology.unwrap_or(TopologySelection::One(Topology::OneRing)),
    };
    let topologies = cli
        .topology
        .map(TopologyArg::selection)
        .unwrap_or(default_topology)
        .topologies();
    let cases = cases(&config, &objectives, &topologies);
    let mut report = RunReport {
        config_echo: config.echo(),
        config: config.to_json(),
        ..RunReport::default()
    };

    let table = match &cli.command {
        Command::Synth => commands::synth(&config, &cases, &mut report)?,
        Command::Fom => commands::fom(&config, &cases, &mut report)?,
        Command::Herald => {
            let protocols = match cli.protocol {
                Some(p) => vec![p.protocol()],
                None => vec![Protocol::TypeI, Protocol::TypeII],
            };
            commands::herald(&config, &cases, &protocols, &mut report)?
        }
        Command::Mc(args) => {
            let protocols = vec![cli.protocol.unwrap_or(ProtocolArg::Type1).protocol()];
            let options = McOptions {
                trials: args.trials,
                seed: args.seed,
                event_log: args.event_log.as_deref(),
            };
            commands::monte_carlo(&config, &cases, &protocols, &options, &mut report)?
        }
        Command::Sweep(args) => {
            let spec = SweepSpec {
                variable: args.variable,
                start: args.start,
                stop: args.stop,
                points: args.points,
                scale: args.scale,
            };
            spec.validate()?;
            return match &cli.out {
                Some(path) => {
                    let mut file = create(path)?;
                    sweep::run(&config, &spec, &cases, &mut file).map_err(|source| CliError::Io {
                        path: path.clone(),
                        source,
                    })
                }
                None => sweep::run(&config, &spec, &cases, &mut io::stdout().lock()).map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                }),
            };
        }
    };

    if cli.format != Format::Structured {
        for w in &report.warnings {
            eprintln!("warning[{}]: {}", w.code, w.message);
        }
    }
    let text = render(cli, &table, &report)?;
    emit(cli, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
