use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fermat_lattice::pipeline::{render, OutputFormat, Outcome, Pipeline, ResourceCaps, RunConfig, Target};
use fermat_lattice::Error;

/// Elementary divisors of linear-cycle and Hodge-cycle lattices of Fermat varieties.
#[derive(Parser)]
#[command(name = "fermat-lattice", version)]
struct Cli {
    /// Only print warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the invariants of one lattice.
    Compute {
        #[command(flatten)]
        common: Common,
        /// full-linear, primitive-linear, primitive-hodge or verify.
        #[arg(long)]
        target: Target,
    },
    /// Compare the primitive linear-cycle and Hodge-cycle lattices.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Dimension of the Fermat variety (even).
    #[arg(long)]
    n: u32,
    /// Degree of the Fermat variety.
    #[arg(long)]
    d: u32,
    /// json, csv or table.
    #[arg(long, default_value = "json")]
    format: OutputFormat,
    /// Directory for cached intermediate matrices.
    #[arg(long = "cache", env = "FERMAT_LATTICE_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Refuse the linear branch beyond this many cycles.
    #[arg(long, default_value_t = ResourceCaps::default().max_cycles)]
    max_cycles: u64,
    /// Refuse the Hodge branch beyond this many multi-indices.
    #[arg(long, default_value_t = ResourceCaps::default().max_mu)]
    max_mu: u64,
    /// Advisory memory budget in MiB.
    #[arg(long, default_value_t = ResourceCaps::default().memory_budget >> 20)]
    memory_mib: u64,
}

impl Common {
    fn config(self, target: Target) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::new(self.n, self.d, target)?;
        cfg.format = self.format;
        cfg.cache_dir = self.cache;
        cfg.jobs = self.jobs;
        cfg.caps = ResourceCaps {
            max_cycles: self.max_cycles,
            max_mu: self.max_mu,
            memory_budget: self.memory_mib.saturating_mul(1 << 20),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

const EXIT_FAILURE: u8 = 1;
const EXIT_REFUSED: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

fn run(cli: Cli) -> Result<u8, Error> {
    let cfg = match cli.command {
        Command::Compute { common, target } => common.config(target)?,
        Command::Verify { common } => common.config(Target::Verify)?,
    };
    let format = cfg.format;
    let outcome = Pipeline::new(cfg)?.run()?;
    print!("{}", render(&outcome, format)?);
    if format == OutputFormat::Json {
        println!();
    }
    Ok(match outcome {
        Outcome::Verification(v) if !v.lists_equal() => EXIT_MISMATCH,
        _ => 0,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::ResourceCap(_)) { EXIT_REFUSED } else { EXIT_FAILURE })
        }
    }
}
