//! Command-line front end for the sweep harness.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use udmac_core::config::AppConfig;
use udmac_core::error::{Result, UdmacError};
use udmac_core::geometry::Dimension;
use udmac_core::sim::Protocol;
use udmac_core::sweep::{
    run_compare, run_freeze_tradeoff, run_sim, run_throughput, run_validate_probability,
    RunContext,
};

#[derive(Parser)]
#[command(
    name = "udmac",
    about = "Store-carry-and-forward UAV MAC: validation sweeps, analytic throughput, \
             protocol simulation",
    version
)]
struct Cli {
    /// Config file (TOML); unset fields fall back to the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in parameter preset.
    #[arg(long, global = true, default_value = "paper-2023")]
    preset: String,

    /// Override the sweep base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (the UDMAC_OUT_DIR environment variable wins).
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Worker pool size.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form vs Monte Carlo encounter probabilities over the sweep grid.
    ValidateProb {
        /// Restrict to one dimension (1, 2 or 3).
        #[arg(long)]
        dim: Option<u8>,
    },
    /// Analytic and simulated throughput for both protocols.
    Throughput {
        #[arg(long)]
        dim: Option<u8>,
    },
    /// Total and per-mode throughput across the freeze-length grid.
    FreezeTradeoff,
    /// Simulate one protocol at the configured operating point.
    Sim {
        /// ud-mac | vemac
        #[arg(long, default_value = "ud-mac")]
        protocol: String,
        #[arg(long, default_value_t = 1)]
        dim: u8,
    },
    /// Matched-seed protocol comparison across the sweep.
    Compare {
        #[arg(long)]
        dim: Option<u8>,
    },
}

fn parse_protocol(name: &str) -> Result<Protocol> {
    match name {
        "ud-mac" | "udmac" => Ok(Protocol::UdMac),
        "vemac" => Ok(Protocol::VeMac),
        other => Err(UdmacError::Config(format!(
            "unknown protocol '{other}' (ud-mac | vemac)"
        ))),
    }
}

fn dims_for(cfg: &AppConfig, only: Option<u8>) -> Result<Vec<Dimension>> {
    match only {
        Some(d) => Ok(vec![Dimension::from_u8(d)?]),
        None => cfg.sweep_dims(),
    }
}

fn main_inner(cli: Cli) -> Result<PathBuf> {
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::preset(&cli.preset)?,
    };
    if let Some(seed) = cli.seed {
        cfg.sweep.base_seed = seed;
    }
    cfg.validate()?;

    let out_dir = match std::env::var_os("UDMAC_OUT_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => cli.out.clone(),
    };
    let jobs = cli.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    let ctx = RunContext::new(cfg, out_dir, jobs);

    match cli.command {
        Command::ValidateProb { dim } => {
            run_validate_probability(&ctx, &dims_for(&ctx.config, dim)?)
        }
        Command::Throughput { dim } => run_throughput(&ctx, &dims_for(&ctx.config, dim)?),
        Command::FreezeTradeoff => run_freeze_tradeoff(&ctx),
        Command::Sim { protocol, dim } => {
            run_sim(&ctx, Dimension::from_u8(dim)?, parse_protocol(&protocol)?)
        }
        Command::Compare { dim } => run_compare(&ctx, &dims_for(&ctx.config, dim)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
