use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qbattery_cli::{parse_config, run, workers_from_env, CliError, Experiment, WORKERS_ENV};

#[derive(Parser, Debug)]
#[command(name = "qb", version, about = "Quantum battery charging simulations")]
#[command(after_help = "The worker count is read from the QB_WORKERS environment variable.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metrics over time for one charger.
    Series(RunArgs),
    /// Maxima over time against the charger amplitude.
    Sweep(RunArgs),
    /// Maxima over time against the battery size.
    Scaling(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the SVG plots.
    #[arg(long)]
    no_plots: bool,
}

fn execute(experiment: Experiment, args: RunArgs) -> Result<(), CliError> {
    if let Some(n) = workers_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| qbattery::Error::ResourceGuard(format!("{WORKERS_ENV}: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config).map_err(|e| qbattery_cli::ConfigError {
        line: None,
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let mut cfg = parse_config(&text, Some(experiment))?;
    if let Some(out) = args.out {
        cfg.output.dir = out;
    }
    if args.no_plots {
        cfg.output.plots = false;
    }
    let summary = run(&cfg)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", summary.csv.display());
    println!("{}", summary.metadata.display());
    for p in &summary.plots {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Series(a) => (Experiment::Series, a),
        Command::Sweep(a) => (Experiment::Sweep, a),
        Command::Scaling(a) => (Experiment::Scaling, a),
    };
    match execute(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
