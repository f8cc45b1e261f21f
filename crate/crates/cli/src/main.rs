//! `ppat`: prove almost-sure termination of probabilistic programs with
//! coin-toss patterns.
//!
//! Exit codes: 0 proven, 1 refuted, 2 inconclusive, 3 input or usage error.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ppat", version, about = "Almost-sure termination via coin-toss patterns")]
struct Cli {
    /// Worker threads for independent instance checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct InstanceArgs {
    /// Parameter values, `NAME=a..b` or `NAME=v`; repeat for several parameters.
    #[arg(long = "instances", value_name = "NAME=RANGE")]
    pub instances: Vec<String>,
    /// Upper bound on explored nodes per instance.
    #[arg(long, default_value_t = 10_000_000)]
    pub node_cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Search for (or check) a terminating pattern.
    Check {
        file: PathBuf,
        #[command(flatten)]
        inst: InstanceArgs,
        /// Every candidate word extends this one.
        #[arg(long, default_value = "")]
        base_word: String,
        /// Refinement rounds per instance.
        #[arg(long, default_value_t = 64)]
        rounds: usize,
        /// Check this pattern instead of synthesizing one.
        #[arg(long)]
        pattern: Option<String>,
        /// Tail of `seq:` patterns that do not name one.
        #[arg(long, default_value = "repeat", value_parser = ["repeat", "free"])]
        tail: String,
        /// Cross-check against the graph oracle and a simulation.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Simulation runs for `--oracle`.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
    /// Write a coin-free transition-system document.
    Instrument {
        file: PathBuf,
        /// Sequence or template pattern; without one every toss becomes a free choice.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long, default_value = "repeat", value_parser = ["repeat", "free"])]
        tail: String,
        /// Output path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the probability of termination by sampling.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Steps before a run counts as not terminated.
        #[arg(long, default_value_t = 100_000)]
        cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Positional strategy for nondeterministic choices.
        #[arg(long, value_parser = ["a0", "a1"])]
        strategy: Option<String>,
    },
    /// Print the explored state space.
    Dump {
        file: PathBuf,
        #[command(flatten)]
        inst: InstanceArgs,
    },
    /// Print the program in canonical form, or its flowgraph.
    Print {
        file: PathBuf,
        #[arg(long)]
        flowgraph: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Check { file, inst, base_word, rounds, pattern, tail, oracle, seed, samples } => {
            let opts = commands::CheckOptions { base_word, rounds, pattern, tail, oracle, seed, samples };
            commands::check(&file, &inst, &opts)
        }
        Command::Instrument { file, pattern, tail, out } => commands::instrument(&file, pattern.as_deref(), &tail, out.as_deref()),
        Command::Simulate { file, inst, samples, cap, seed, strategy } => {
            commands::simulate(&file, &inst, samples, cap, seed, strategy.as_deref())
        }
        Command::Dump { file, inst } => commands::dump(&file, &inst),
        Command::Print { file, flowgraph } => commands::print(&file, flowgraph),
    };
    match result {
        Ok((text, outcome)) => {
            print!("{text}");
            ExitCode::from(outcome as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
