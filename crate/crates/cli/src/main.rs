use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use vascfem_cli::config::Experiment;
use vascfem_cli::{run_with_threads, write_outputs, ExperimentConfig};

/// Immersed-vessel elasticity experiments.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Error and rates against the exact single-vessel solution.
    Converge(Common),
    /// One solve; face forces, face averages and optional VTK.
    Solve(Common),
    /// Face-force statistics over random realizations.
    Stats(Common),
    /// Grow a tree, solve, report directions and traction moments.
    Tree(Common),
    /// Homogenized predictions only.
    Homog(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let (expected, args) = match Cli::parse().command {
        Command::Converge(a) => (Experiment::Converge, a),
        Command::Solve(a) => (Experiment::Solve, a),
        Command::Stats(a) => (Experiment::Stats, a),
        Command::Tree(a) => (Experiment::Tree, a),
        Command::Homog(a) => (Experiment::Homog, a),
    };
    let cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != expected {
        bail!("configuration is for {:?}, not {:?}", cfg.experiment, expected);
    }
    let threads = args.threads.or(cfg.run.threads);
    let outputs = run_with_threads(&cfg, args.seed, threads)?;
    let dir = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    write_outputs(&outputs, &dir, cfg.output.vtk)?;
    for (name, _) in &outputs.tables {
        println!("{}", dir.join(name).display());
    }
    Ok(())
}
