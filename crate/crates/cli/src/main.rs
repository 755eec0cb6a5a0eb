//! `pobp` command-line front end.

mod cost;
mod diagnose;
mod evaluate;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pobp::ErrorKind;

#[derive(Debug, Parser)]
#[command(name = "pobp", version, about = "Parallel online belief propagation for LDA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a topic model on a UCI bag-of-words corpus.
    Train(train::TrainArgs),
    /// Predictive perplexity of a saved model on a corpus.
    Evaluate(evaluate::EvaluateArgs),
    /// Evaluate the analytic cost model.
    CostModel(cost::CostArgs),
    /// Power-law report over a residual checkpoint.
    Diagnose(diagnose::DiagnoseArgs),
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 1,
        ErrorKind::Io => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POBP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::CostModel(a) => cost::run(a),
        Command::Diagnose(a) => diagnose::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
