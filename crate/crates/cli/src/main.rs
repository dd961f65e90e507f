//! `agrkit`: validate organisation models, simulate them, check properties
//! on traces, analyse interlevel relations and check agent realizations.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "agrkit",
    version,
    about = "Organisation models: structure, dynamics, simulation and interlevel analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output style for the run report.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model (and optionally a realization) for well-formedness.
    Validate {
        model: PathBuf,
        realization: Option<PathBuf>,
        /// Report missing agent ontology predicates as warnings.
        #[arg(long)]
        overlap: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the executable part of a model into a trace.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        horizon: i64,
        /// Seed for delay choices; without it every delay takes its minimum.
        #[arg(long)]
        seed: Option<u64>,
        /// Trace output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Property ids whose rules are left out of the run.
        #[arg(long, value_delimiter = ',')]
        disable: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check properties on one or more traces.
    Check {
        model: PathBuf,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Property to check; repeatable.
        #[arg(long = "prop")]
        props: Vec<String>,
        #[arg(long, conflicts_with = "props")]
        all: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Analyse an interlevel assignment and optionally diagnose a failure.
    Interlevel {
        model: PathBuf,
        #[arg(long, conflicts_with = "assignment")]
        standard: bool,
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        traces: Vec<PathBuf>,
        /// Failing property to trace down the AND-tree (first trace).
        #[arg(long)]
        diagnose: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Validate a realization and refute its entailments on traces.
    Realize {
        model: PathBuf,
        realization: PathBuf,
        #[arg(long, num_args = 1..)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        overlap: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().collect();
    let outcome = match cli.command {
        Command::Validate {
            model,
            realization,
            overlap,
            common,
        } => commands::validate(
            &args,
            &model,
            realization.as_deref(),
            overlap,
            common.format,
        ),
        Command::Simulate {
            model,
            stimuli,
            horizon,
            seed,
            output,
            disable,
            common,
        } => commands::simulate(
            &args,
            commands::SimulateOptions {
                model: &model,
                stimuli: &stimuli,
                horizon,
                seed,
                output: output.as_deref(),
                disable: &disable,
            },
            common.format,
        ),
        Command::Check {
            model,
            traces,
            props,
            all,
            common,
        } => commands::check(&args, &model, &traces, &props, all, common.format),
        Command::Interlevel {
            model,
            standard,
            assignment,
            traces,
            diagnose,
            common,
        } => commands::interlevel(
            &args,
            commands::InterlevelOptions {
                model: &model,
                standard,
                assignment: assignment.as_deref(),
                traces: &traces,
                diagnose: diagnose.as_deref(),
            },
            common.format,
        ),
        Command::Realize {
            model,
            realization,
            traces,
            overlap,
            common,
        } => commands::realize(&args, &model, &realization, &traces, overlap, common.format),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("agrkit: {e:#}");
            ExitCode::from(2)
        }
    }
}
