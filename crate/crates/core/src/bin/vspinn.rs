use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vspinn::experiment::{self, ExperimentConfig};
use vspinn::Error;

#[derive(Parser)]
#[command(name = "vspinn", about = "Stacked residual PINNs with vanishing viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Godunov solver and write the reference field and measurements.
    Simulate(Common),
    /// Train one model.
    Train(Common),
    /// Re-evaluate a saved checkpoint against the reference field.
    Evaluate(Common),
    /// Train every (n, seed) cell of the configured sweep.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of residual blocks.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Iteration budget (overrides the configuration).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, PathBuf), Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(iters) = self.iters {
            cfg.train.max_iters = iters;
        }
        if let Some(n) = self.n {
            cfg.train.n_blocks = n;
        }
        if let Some(seed) = self.seed {
            cfg.train.seed = seed;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
        Ok((cfg, out))
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(args) => {
            let (cfg, out) = args.resolve()?;
            let s = experiment::simulate(&cfg, &out)?;
            if !args.quiet {
                println!(
                    "grid nx={} nt={} dx={:.6} dt={:.6}; {} measurements",
                    s.nx, s.nt, s.dx, s.dt, s.measurements
                );
                println!("wrote {} and {}", s.field_path.display(), s.dataset_path.display());
            }
        }
        Command::Train(args) => {
            let (cfg, out) = args.resolve()?;
            let o = experiment::train_one(&cfg, &out, cfg.train.n_blocks, cfg.train.seed)?;
            if !args.quiet {
                println!(
                    "n={} seed={} stopped at {} ({:?}); relative L2 = {:.4e}",
                    o.n, o.seed, o.history.stop_iteration, o.history.stop_reason, o.report.relative_l2
                );
                for (i, e) in &o.stage_errors {
                    println!("  stage {i}: {e:.4e}");
                }
            }
        }
        Command::Evaluate(args) => {
            let (cfg, out) = args.resolve()?;
            let report = experiment::evaluate(&out, cfg.train.n_blocks, cfg.train.seed)?;
            print!("{}", report.to_text());
        }
        Command::Sweep(args) => {
            let (mut cfg, out) = args.resolve()?;
            if let Some(n) = args.n {
                cfg.sweep = vec![n];
            }
            if let Some(seed) = args.seed {
                cfg.seeds = vec![seed];
            }
            let quiet = args.quiet;
            experiment::sweep(&cfg, &out, |row| {
                if !quiet {
                    println!(
                        "n={} seed={} relative L2 = {:.4e} (stopped at {})",
                        row.n, row.seed, row.relative_l2, row.stop_iteration
                    );
                }
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Divergence { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
