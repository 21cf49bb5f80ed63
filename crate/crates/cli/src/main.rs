use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use marnet_cli::gradcheck::{self, GradcheckSpec};
use marnet_cli::report::{self, BoundKind, BoundParams};
use marnet_cli::{sweep, CliError, CliResult, ExperimentConfig};
use marnet_core::{ActivationKind, LossKind};

#[derive(Parser)]
#[command(name = "marnet", version, about = "Angular-diversity bounds, sweeps and gradient checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a bound and print a CSV table.
    Bounds {
        /// estimation, estimation-ml, logistic, hinge, xent, approximation or tradeoff
        kind: String,
        /// `--key value` pairs; `--output <path>` writes to a file
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// Train one network per (seed, lambda) cell and write the results table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare backprop against central finite differences.
    Gradcheck {
        #[arg(long, value_delimiter = ',', default_value = "4,5,3")]
        shape: Vec<usize>,
        #[arg(long, default_value = "cross_entropy")]
        loss: LossKind,
        #[arg(long, default_value = "tanh")]
        activation: ActivationKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check only this lambda instead of both 0 and 0.1.
        #[arg(long)]
        lambda: Option<f64>,
        /// Perturb one analytic gradient entry; the check must then fail.
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

fn write_or_print(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bounds { kind, mut params } => {
            let kind: BoundKind = kind.parse()?;
            let output = match params.iter().position(|p| p == "--output") {
                Some(i) if i + 1 < params.len() => {
                    let path = PathBuf::from(params.remove(i + 1));
                    params.remove(i);
                    Some(path)
                }
                Some(_) => return Err(CliError::Invalid("missing value for `--output`".into())),
                None => None,
            };
            let table = report::bounds_csv(kind, &BoundParams::parse(&params)?)?;
            write_or_print(&table, output.as_ref())
        }
        Command::Sweep { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let records = sweep::run_sweep(&cfg)?;
            let table = sweep::sweep_csv(&records, cfg.hidden.len())?;
            let output = output.or(cfg.output.clone());
            write_or_print(&table, output.as_ref())?;
            if let Some(path) = &output {
                write_or_print(&sweep::timing_csv(&records)?, Some(&sweep::timing_path(path)))?;
            }
            if let Some(dir) = &cfg.checkpoint_dir {
                sweep::write_checkpoints(&records, dir)?;
            }
            let diverged = records.iter().filter(|r| r.diverged).count();
            if diverged > 0 {
                eprintln!("warning: {diverged} of {} cells diverged", records.len());
            }
            Ok(())
        }
        Command::Gradcheck {
            shape,
            loss,
            activation,
            seed,
            lambda,
            corrupt,
        } => {
            let lambdas = lambda.map_or(vec![0.0, 0.1], |l| vec![l]);
            let mut worst = 0.0f64;
            for lambda in lambdas {
                let spec = GradcheckSpec {
                    shape: shape.clone(),
                    loss,
                    activation,
                    lambda,
                    seed,
                    ..Default::default()
                };
                let r = gradcheck::gradcheck_with(&spec, |g| {
                    if corrupt {
                        let v = g[0].get(0, 0);
                        g[0].set(0, 0, v + 1e-2);
                    }
                })?;
                println!(
                    "lambda={} entries={} max_rel_error={:e}",
                    lambda, r.entries, r.max_rel_error
                );
                worst = worst.max(r.max_rel_error);
            }
            if worst < gradcheck::TOLERANCE {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!(
                    "gradient check failed: max relative error {worst:e} >= {:e}",
                    gradcheck::TOLERANCE
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
