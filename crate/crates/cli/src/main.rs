//! lexigraph: multiplex lexical networks plus per-layer temporal graph
//! models for predicting which words a child acquires next.

mod artifacts;
mod commands;
mod config;
mod error;
mod inputs;

use clap::{Parser, Subcommand};

use error::CliResult;

#[derive(Parser)]
#[command(
    name = "lexigraph",
    version,
    about = "Build multiplex lexical networks and predict vocabulary growth",
    after_help = "Logging goes through the LEXIGRAPH_LOG environment variable \
                  (error, warn, info, debug, trace)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with a planted relationship layer
    Synth(commands::synth::SynthArgs),
    /// Build the lexicon and relationship layers from norm CSVs
    BuildGraphs(commands::build_graphs::BuildGraphsArgs),
    /// Repair, window and split an observation file
    Prepare(commands::prepare::PrepareArgs),
    /// Train one model per layer plus the baseline, end to end
    Train(commands::train::TrainArgs),
    /// Rank acquisition candidates for each child's next observation
    Predict(commands::predict::PredictArgs),
    /// Score trained models and write the per-layer report
    Evaluate(commands::evaluate::EvaluateArgs),
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::BuildGraphs(args) => commands::build_graphs::run(args),
        Command::Prepare(args) => commands::prepare::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Predict(args) => commands::predict::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("LEXIGRAPH_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    if let Err(err) = dispatch(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
