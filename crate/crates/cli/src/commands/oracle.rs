use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sgs_core::oracle::validate;
use sgs_core::rng::derive_rng;
use sgs_core::strategy::chromosome_from_json;

use super::{load_game, thread_pool, CmdResult};

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
    /// Monte-Carlo playouts per adversary strategy.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

pub fn run(args: Args) -> CmdResult {
    let game = load_game(&args.game)?;
    let text = std::fs::read_to_string(&args.strategy)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", args.strategy.display()))?;
    let chromosome = chromosome_from_json(&text, &game)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.strategy.display()))?;

    let pool = thread_pool(args.threads)?;
    let mut rng = derive_rng(args.seed, 0, 0, 0);
    let report = pool.install(|| validate(&chromosome, &game, args.samples, &mut rng))?;
    println!("{}", report.to_json());
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
