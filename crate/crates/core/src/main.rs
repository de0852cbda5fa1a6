use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use linwave::report::{self, SweepError, SweepParam};
use linwave::scenario::{ConfigError, Scenario};
use linwave::Error;

#[derive(Parser)]
#[command(name = "linwave", version, about = "Exact and grid-propagated wave packets in a uniform time-dependent force")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate analytic (and, with a [grid] section, numerical) moments over time.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Propagate on the grid and check agreement with the closed form.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
    /// Vary one parameter and tabulate widths and uncertainty products.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the moments at a single time.
    Moments {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        time: f64,
    },
}

enum Failure {
    Config(ConfigError),
    Tolerance,
    Numeric(Error),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::NegativeTime(_) => Self::Config(ConfigError::Validation {
                line: None,
                message: e.to_string(),
            }),
            e => Self::Numeric(e),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => c.into(),
            SweepError::Numeric(n) => n.into(),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evolve { config, output } => {
            let s = Scenario::from_file(&config)?;
            let rows = report::run_evolve(&s)?;
            write(&output, &report::rows_to_csv(&rows))
        }
        Command::Compare { config } => {
            let s = Scenario::from_file(&config)?;
            let summary = report::run_compare(&s)?;
            print!("{summary}");
            if summary.passed() {
                Ok(())
            } else {
                Err(Failure::Tolerance)
            }
        }
        Command::Sweep {
            config,
            param,
            values,
            output,
        } => {
            let s = Scenario::from_file(&config)?;
            let param: SweepParam = param.parse()?;
            if values.is_empty() {
                return Err(ConfigError::Validation {
                    line: None,
                    message: "--values needs at least one number".into(),
                }
                .into());
            }
            let rows = report::run_sweep(&s, param, &values)?;
            write(&output, &report::sweep_to_csv(&rows))
        }
        Command::Moments { config, time } => {
            let s = Scenario::from_file(&config)?;
            let (analytic, grid) = report::moments_at(&s, time)?;
            print!("{}", report::format_moments(&analytic));
            if let Some(g) = grid {
                print!("{}", report::format_moments(&g));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Tolerance) => {
            eprintln!("error: tolerance check failed");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
    }
}
