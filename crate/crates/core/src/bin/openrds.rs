use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use openrds::analysis::Estimator;
use openrds::cli::{load_config, run, Command};

#[derive(Parser)]
#[command(
    name = "openrds",
    version,
    about = "Quenched thermodynamic formalism for random open interval maps"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for orbit sampling; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    estimator: Option<EstimatorArg>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    Pressure,
    Dimension,
    Escape,
    Density,
    Decay,
    Check,
    Oracle,
}

#[derive(ValueEnum, Clone, Copy)]
enum EstimatorArg {
    Sandwich,
    Lambda,
    Analytic,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(config) = args.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let estimator = args.estimator.map(|e| match e {
        EstimatorArg::Sandwich => Estimator::Sandwich,
        EstimatorArg::Lambda => Estimator::LambdaProduct,
        EstimatorArg::Analytic => Estimator::Analytic,
    });
    let command = match args.command {
        Cmd::Pressure => Command::Pressure,
        Cmd::Dimension => Command::Dimension,
        Cmd::Escape => Command::Escape,
        Cmd::Density => Command::Density,
        Cmd::Decay => Command::Decay,
        Cmd::Check => Command::Check,
        Cmd::Oracle => Command::Oracle,
    };
    let result =
        load_config(&config, args.out, args.seed, estimator).and_then(|cfg| run(command, &cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
