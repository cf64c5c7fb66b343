use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use margin_rates_cli::{run, ExperimentConfig, ExperimentKind, RunOptions};

#[derive(Parser)]
#[command(name = "margin-rates", version, about = "Rate experiments for plug-in and sieve classifiers under the margin condition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON); absent keys take the subcommand defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write a log-log SVG plot with this file name.
    #[arg(long)]
    svg: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Record wall-clock milliseconds per row (makes CSVs non-reproducible).
    #[arg(long)]
    wall_time: bool,
    /// Print the effective config as JSON and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Excess-risk rate of the plug-in (or sieve) rule against theory.
    Rates(Common),
    /// Exceedance probabilities of the local polynomial estimate at a point.
    Concentration(Common),
    /// Empirical margin mass against the closed form and the envelope.
    MarginCheck(Common),
    /// Average excess over all hypercube sign vectors against the Assouad bound.
    LowerBound(Common),
    /// Excess of random piecewise-constant rules against comparison bounds.
    CompareBounds(Common),
    /// Sieve and plug-in rules on shared samples.
    SieveVsPlugin(Common),
    /// Fixed-bandwidth plug-in rule on a law with a margin gap.
    Corridor(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Rates(a) => (ExperimentKind::Rates, a),
        Command::Concentration(a) => (ExperimentKind::Concentration, a),
        Command::MarginCheck(a) => (ExperimentKind::MarginCheck, a),
        Command::LowerBound(a) => (ExperimentKind::LowerBound, a),
        Command::CompareBounds(a) => (ExperimentKind::CompareBounds, a),
        Command::SieveVsPlugin(a) => (ExperimentKind::SieveVsPlugin, a),
        Command::Corridor(a) => (ExperimentKind::Corridor, a),
    };
    let mut cfg = match ExperimentConfig::load(kind, args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    let opts = RunOptions { out: args.out, svg: args.svg, wall_time: args.wall_time };
    match run(&cfg, &opts) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
