use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use odeheat::experiments::config::AdjointSpec;
use odeheat::experiments::runner::resolve_output_dir;
use odeheat::experiments::{output, preset, run_experiment, ExperimentConfig, RunReport};
use odeheat::Execution;

/// Penalized HUM null controls for a heat equation coupled to an ODE.
#[derive(Parser)]
#[command(name = "odeheat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the built-in experiments (test1, test2, test3).
    RunPreset {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a config file with a different list of penalty values.
    Sweep {
        config: PathBuf,
        /// Penalty values, in output order.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Output directory [default: the config's output_dir, else out/<name>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Adjoint discretization.
    #[arg(long, value_enum)]
    adjoint: Option<Adjoint>,
    /// Time-stepping parameter in [0.5, 1] (1 = implicit Euler, 0.5 = Crank-Nicolson).
    #[arg(long)]
    theta: Option<f64>,
    /// Run the penalty values one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Adjoint {
    Discrete,
    Continuous,
}

impl RunOpts {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(a) = self.adjoint {
            cfg.solver.adjoint = match a {
                Adjoint::Discrete => AdjointSpec::Discrete,
                Adjoint::Continuous => AdjointSpec::Continuous,
            };
        }
        if let Some(theta) = self.theta {
            cfg.solver.theta = theta;
        }
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_file(path).with_context(|| format!("loading {}", path.display()))
}

fn execute(mut cfg: ExperimentConfig, opts: &RunOpts) -> Result<RunReport> {
    opts.apply(&mut cfg);
    cfg.validate()?;
    let dir = resolve_output_dir(&cfg, opts.out.as_deref());
    Ok(run_experiment(&cfg, &dir, opts.execution())?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::RunPreset { name, opts } => preset(&name)
            .map_err(Into::into)
            .and_then(|c| execute(c, &opts)),
        Command::Run { config, opts } => load(&config).and_then(|c| execute(c, &opts)),
        Command::Sweep {
            config,
            epsilons,
            opts,
        } => load(&config).and_then(|mut c| {
            c.hum.epsilons = epsilons;
            execute(c, &opts)
        }),
    };
    match result {
        Ok(report) => {
            print!("{}", output::format_summary(&report.rows));
            for eps in report.unconverged() {
                eprintln!(
                    "warning: CG stopped at max_iter without reaching tol for epsilon = {eps:e}"
                );
            }
            eprintln!(
                "wrote {} files to {}",
                report.files.len(),
                report.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
