use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use sgs_core::evolve::{run as solve_game, write_history_csv, EvolveParams};
use sgs_core::strategy::chromosome_to_json;

use super::{load_game, parse_ablation, peak_memory_bytes, thread_pool, CmdResult};

#[derive(Serialize)]
struct RunSummary {
    best_fitness: f64,
    generations_to_best: usize,
    wall_time_ms: u64,
    peak_mem_bytes: u64,
    seed: u64,
}

#[derive(Parser)]
pub struct Args {
    #[arg(long)]
    game: PathBuf,
    /// Solver parameters as JSON; omitted fields fall back to the tuned
    /// defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Output directory for strategy.json, history.csv, and result.json.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated ablation switches, unioned with the params file.
    #[arg(long)]
    ablation: Option<String>,
    /// Evaluation worker threads (0 = automatic). Output bytes do not
    /// depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

pub fn run(args: Args) -> CmdResult {
    let game = load_game(&args.game)?;
    let mut params = match &args.params {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
            serde_json::from_str::<EvolveParams>(&text)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
        }
        None => EvolveParams::default(),
    };
    params.seed = args.seed;
    if let Some(list) = &args.ablation {
        params.ablation.extend(parse_ablation(list)?);
    }

    // The output directory must be writable before any work starts.
    std::fs::create_dir_all(&args.out)?;

    let pool = thread_pool(args.threads)?;
    let started = Instant::now();
    let result = pool.install(|| solve_game(&game, &params))?;
    let wall_time_ms = started.elapsed().as_millis() as u64;

    std::fs::write(
        args.out.join("strategy.json"),
        chromosome_to_json(&result.best),
    )?;
    std::fs::write(args.out.join("history.csv"), write_history_csv(&result))?;
    let summary = RunSummary {
        best_fitness: result.best_fitness,
        generations_to_best: result.generations_to_best,
        wall_time_ms,
        peak_mem_bytes: peak_memory_bytes(),
        seed: args.seed,
    };
    std::fs::write(
        args.out.join("result.json"),
        serde_json::to_string(&summary).expect("summary encoding"),
    )?;
    println!(
        "best fitness {} found at generation {} in {} ms",
        result.best_fitness, result.generations_to_best, wall_time_ms
    );
    Ok(ExitCode::SUCCESS)
}
