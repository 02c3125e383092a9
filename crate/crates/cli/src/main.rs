//! `optic`: run routing scenarios against the reference decision process, and
//! evaluate the distinct-set model.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on usage or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod model;
mod simulate;

#[derive(Parser, Debug)]
#[command(name = "optic", version, about = "Optimal-protecting gateway sets: simulation and scaling model")]
struct Cli {
    /// Worker threads for fuzzing and sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bootstrap from a topology and RIB, replay a scenario, and check every
    /// selection against the reference decision process.
    Simulate(SimulateArgs),
    /// Evaluate the distinct-set model.
    #[command(subcommand)]
    Model(model::ModelCommand),
    /// Print the stored gateway sets and the set each prefix points to.
    DumpState(StateArgs),
}

#[derive(Args, Debug)]
struct Inputs {
    #[arg(long, conflicts_with = "example")]
    topology: Option<PathBuf>,
    #[arg(long, conflicts_with = "example")]
    rib: Option<PathBuf>,
    #[arg(long, conflicts_with = "example")]
    scenario: Option<PathBuf>,
    /// Use a bundled example instead of input files.
    #[arg(long, value_enum)]
    example: Option<Example>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Example {
    Fig2,
}

#[derive(Args, Debug, Clone, Copy)]
struct Flags {
    /// Allow two-gateway sets built from the best and the runner-up group.
    #[arg(long)]
    opt_second_mr: bool,
    /// Keep only the lowest reachable MED tier of each chain.
    #[arg(long)]
    opt_drop_med: bool,
    /// MED assumed for routes without one.
    #[arg(long, value_name = "MED", conflicts_with = "med_ignore")]
    med_default: Option<u32>,
    /// Ignore MED entirely.
    #[arg(long)]
    med_ignore: bool,
    /// Keep sets that no prefix points to.
    #[arg(long)]
    retain_unused_opr: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    flags: Flags,
    /// Run N generated cases instead of a scenario.
    #[arg(long, value_name = "N", conflicts_with_all = ["topology", "rib", "scenario", "example"])]
    fuzz: Option<usize>,
    /// Fuzz with all four extraction option combinations.
    #[arg(long, requires = "fuzz")]
    all_options: bool,
    /// Seed for generated cases.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StateArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    flags: Flags,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Pass,
    Fail,
}

pub type Outcome = Result<Status, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Simulate(args) => simulate::simulate(&args),
        Command::Model(cmd) => model::run(&cmd),
        Command::DumpState(args) => simulate::dump_state(&args),
    };
    match outcome {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
