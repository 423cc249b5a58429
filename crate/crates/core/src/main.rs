use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use episignal::report::stages::{run_stage, Stage};
use episignal::report::{Config, RunContext};
use episignal::{Error, Parallelism};

/// Tweet volume, case counts, R(t) periods, topics and topic categories for
/// composite regions.
#[derive(Debug, Parser)]
#[command(name = "episignal", version)]
struct Cli {
    /// Stage to run; `pipeline` runs all of them in order.
    #[arg(value_enum)]
    stage: Stage,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config file and EPISIGNAL_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict the run to one configured region.
    #[arg(long)]
    region: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Abort on the first malformed input line instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Fan regions, days and grid cells out over threads.
    #[arg(long)]
    parallel: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let c = cli.common;
    let config = Config::load(&c.config)?;
    let seed = config.effective_seed(c.seed)?;
    let ctx = RunContext::new(
        config,
        seed,
        c.region.as_deref(),
        c.strict,
        Parallelism::from_flag(c.parallel),
    )?;
    run_stage(cli.stage, &ctx, &c.out_dir)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("episignal: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
