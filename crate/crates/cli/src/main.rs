use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hitrocket_cli::{configure_threads, run, Command};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Transform,
    Train,
    Predict,
    Bench,
    NoiseSweep,
}

/// Hadamard convolution features: transform, train, predict and benchmark.
#[derive(Parser)]
#[command(name = "hitrocket", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the transform seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides io.output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let command = match args.command {
        Cmd::Transform => Command::Transform,
        Cmd::Train => Command::Train,
        Cmd::Predict => Command::Predict,
        Cmd::Bench => Command::Bench,
        Cmd::NoiseSweep => Command::NoiseSweep,
    };
    let result = configure_threads().and_then(|()| run(command, &args.config, args.seed, args.output_dir));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
