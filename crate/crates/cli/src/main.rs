//! `dts`: run DTS simulations, strategy searches, proof-size reports, VRP
//! checks and volatility analyses from the command line.

mod commands;
mod config;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "dts", version, about = "Dynamic transaction storage simulator and analysis tools")]
#[command(subcommand_required = false, arg_required_else_help = true)]
struct Cli {
    /// Print the built-in configuration as TOML and exit.
    #[arg(long)]
    print_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one strategy over a transaction stream.
    Simulate(commands::simulate::SimulateArgs),
    /// Search strategy attributes with a metaheuristic, or run the full grid.
    Optimize(commands::optimize::OptimizeArgs),
    /// Merkle and Verkle proof sizes per scenario and branching factor.
    Proofsize(commands::proofsize::ProofsizeArgs),
    /// Check a block-membership CSV against the VRP constraints.
    VrpCheck(commands::vrp_check::VrpCheckArgs),
    /// Volatility of an incentive column, optionally rolling.
    Volatility(commands::volatility::VolatilityArgs),
    /// Write a synthetic transaction stream.
    Generate(commands::generate::GenerateArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if cli.print_defaults {
        print!("{}", RunConfig::default().to_toml());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    let result = match command {
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Optimize(a) => commands::optimize::run(a),
        Command::Proofsize(a) => commands::proofsize::run(a),
        Command::VrpCheck(a) => commands::vrp_check::run(a),
        Command::Volatility(a) => commands::volatility::run(a),
        Command::Generate(a) => commands::generate::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
