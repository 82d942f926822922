//! `ap3d`: kernel checks, model sweeps, thermal maps and workload runs.
//!
//! Every command writes plain CSV, JSON or PGM files and exits nonzero when
//! an internal verification fails.

mod config;
mod kernel;
mod sweep;
mod thermal;
mod workload;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Inputs;

#[derive(Debug, Parser)]
#[command(name = "ap3d", version, about = "Associative processor simulator and analysis toolkit")]
struct Cli {
    /// Parameter set JSON (defaults to $AP3D_PARAMS_DIR/params.json, then the built-in set).
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Layer stack JSON (defaults to $AP3D_PARAMS_DIR/stack.json, then the built-in stack).
    #[arg(long, global = true)]
    stack: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "ap3d-out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one kernel on random rows and check it against its oracle and cycle law.
    Kernel(kernel::KernelArgs),
    /// Sample speedup, power and density over an area range.
    Sweep(sweep::SweepArgs),
    /// Solve the steady-state temperature of a floorplan on the layer stack.
    Thermal(thermal::ThermalArgs),
    /// Run a workload end to end and check it against its oracle.
    Workload(workload::WorkloadArgs),
    /// Write a reference floorplan as JSON.
    FloorplanDump(thermal::DumpArgs),
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let inputs = Inputs { params: cli.params, stack: cli.stack, out: cli.out, seed: cli.seed };
    match cli.command {
        Command::Kernel(a) => kernel::run(&inputs, &a),
        Command::Sweep(a) => sweep::run(&inputs, &a),
        Command::Thermal(a) => thermal::run(&inputs, &a),
        Command::Workload(a) => workload::run(&inputs, &a),
        Command::FloorplanDump(a) => thermal::dump(&inputs, &a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
