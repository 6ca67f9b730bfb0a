use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dkg_cli::{with_workers, CliError, Outcome, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "dkg", version, about = "Dirac-Klein-Gordon spectral runs, estimate suites and radius certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the data seed and the lab seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Suite,
    },
    Certificate {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let common = match &cli.command {
        Command::Simulate { common } | Command::Verify { common, .. } | Command::Certificate { common } => common,
    };
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(out) = &common.out {
        cfg.output.directory = out.clone();
    }
    let dir = cfg.output.directory.clone();
    with_workers(cfg.output.workers, || match cli.command {
        Command::Simulate { .. } => dkg_cli::simulate(&cfg, &dir),
        Command::Verify { suite, .. } => dkg_cli::verify(&cfg, suite, &dir).map(|(o, _)| o),
        Command::Certificate { .. } => dkg_cli::certificate(&cfg, &dir),
    })?
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("dkg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
