use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwdecay::{exit_outcome, load_config, run_bounds, run_certify, run_spectrum, run_validate, Outcome, Overrides};
use qwdecay_core::Execution;

#[derive(Parser)]
#[command(name = "qwdecay", version, about = "Coined quantum walks with a coin defect: spectra and decay certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the config and report every coin condition.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Write spectrum.csv and arcs.csv.
    Spectrum {
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Detect discrete eigenvalues and certify their decay.
    Certify {
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Sweep the commutator bounds and write bounds.csv.
    Bounds {
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Override the box side L (odd).
    #[arg(long = "L")]
    side: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Momentum grid refinement per lattice momentum.
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long = "delta-fraction")]
    delta_fraction: Option<f64>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides { side: self.side, seed: self.seed, refinement: self.refine, delta_fraction: self.delta_fraction }
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, flags) = match &cli.command {
        Command::Validate { config, flags }
        | Command::Spectrum { config, flags, .. }
        | Command::Certify { config, flags, .. }
        | Command::Bounds { config, flags, .. } => (config, flags),
    };
    let cfg = match load_config(config, &flags.overrides()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Outcome::Invalid.code() as u8);
        }
    };
    let exec = flags.exec();
    let result = match &cli.command {
        Command::Validate { .. } => Ok(run_validate(&cfg)),
        Command::Spectrum { output, .. } => run_spectrum(&cfg, output, exec),
        Command::Certify { output, .. } => run_certify(&cfg, output, exec),
        Command::Bounds { output, .. } => run_bounds(&cfg, output, exec),
    };
    ExitCode::from(exit_outcome(result).code() as u8)
}
