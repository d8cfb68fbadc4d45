use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sgs_core::eval::best_response;
use sgs_core::strategy::chromosome_from_json;

use super::{load_game, CmdResult};

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
}

pub fn run(args: Args) -> CmdResult {
    let game = load_game(&args.game)?;
    let text = std::fs::read_to_string(&args.strategy)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", args.strategy.display()))?;
    let chromosome = chromosome_from_json(&text, &game)
        .map_err(|e| anyhow::anyhow!("{}: {e}", args.strategy.display()))?;
    let report = best_response(&chromosome, &game);
    println!("{}", report.to_json());
    Ok(ExitCode::SUCCESS)
}
