//! Command-line front end: key and transaction tooling, mining, chain
//! auditing, simulation, analysis tables, and scripted layer-2 / interop
//! scenarios. Every run is deterministic under an explicit seed and emits a
//! manifest describing exactly what produced its outputs.

mod commands;
mod manifest;
mod output;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub use manifest::RunManifest;
pub use output::{Format, OutputSink};

/// Exit codes: 0 ok, 1 usage, 2 domain error, 3 internal error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "chainbench",
    version,
    about = "Deterministic blockchain workbench: PoW/UTXO chain, account chain, \
             network simulator, security math, Plasma exits, and atomic swaps"
)]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a key pair and its address.
    Keygen(commands::keygen::KeygenArgs),
    /// Build and validate transactions from a wallet scenario.
    #[command(subcommand)]
    Tx(commands::tx::TxCommand),
    /// Mine a chain of blocks and write a snapshot.
    Mine(commands::mine::MineArgs),
    /// Validate or audit a chain snapshot.
    #[command(subcommand)]
    Chain(commands::chain::ChainCommand),
    /// Run the gossip network simulator.
    #[command(subcommand)]
    Sim(commands::sim::SimCommand),
    /// Security mathematics: finality, difficulty, unfairness, efficiency.
    #[command(subcommand)]
    Analyze(commands::analyze::AnalyzeCommand),
    /// Layer-2 Plasma scenarios.
    #[command(subcommand)]
    Plasma(commands::plasma::PlasmaCommand),
    /// Atomic swap scenarios.
    #[command(subcommand)]
    Swap(commands::swap::SwapCommand),
    /// Chain-bridge scenarios.
    #[command(subcommand)]
    Bridge(commands::bridge::BridgeCommand),
}

/// Domain and internal failures carried to the exit-code mapping.
#[derive(Debug)]
pub enum CliError {
    /// Invalid inputs, failed validations, rejected scenarios.
    Domain(String),
    /// IO and serialization faults.
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(msg) => write!(f, "error: {msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::Internal(e.to_string())
    }
}

pub(crate) fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

/// Parse argv and dispatch; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(args.iter().cloned()) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let command_line: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match dispatch(&cli, &command_line) {
        Ok(()) => EXIT_OK,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DOMAIN
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn dispatch(cli: &Cli, command_line: &[String]) -> Result<(), CliError> {
    let mut sink = OutputSink::new(cli.format, cli.out.clone(), cli.seed, command_line)?;
    match &cli.command {
        Command::Keygen(args) => commands::keygen::run(args, cli.seed, &mut sink),
        Command::Tx(cmd) => commands::tx::run(cmd, &mut sink),
        Command::Mine(args) => commands::mine::run(args, cli.seed, &mut sink),
        Command::Chain(cmd) => commands::chain::run(cmd, &mut sink),
        Command::Sim(cmd) => commands::sim::run(cmd, cli.seed, &mut sink),
        Command::Analyze(cmd) => commands::analyze::run(cmd, &mut sink),
        Command::Plasma(cmd) => commands::plasma::run(cmd, &mut sink),
        Command::Swap(cmd) => commands::swap::run(cmd, &mut sink),
        Command::Bridge(cmd) => commands::bridge::run(cmd, &mut sink),
    }?;
    sink.finish()?;
    Ok(())
}
