use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rayon::prelude::*;

use sgs_core::evolve::{run as solve_game, AblationSwitch, EvolveParams};
use sgs_core::GameInstance;

use super::{load_game, thread_pool, CliError, CmdResult};

#[derive(Parser)]
pub struct Args {
    /// Directory of game JSON files (manifest.json is skipped).
    #[arg(long)]
    games: PathBuf,
    /// Comma-separated variants: `full` or any ablation switch name.
    #[arg(long)]
    variants: String,
    /// Number of seeds per variant and game; run `i` uses `seed + i`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    #[arg(long)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone)]
struct Variant {
    name: String,
    ablation: BTreeSet<AblationSwitch>,
}

fn parse_variants(list: &str) -> Result<Vec<Variant>, CliError> {
    let valid = || {
        let mut names = vec!["full".to_string()];
        names.extend(AblationSwitch::ALL.iter().map(|s| s.name().to_string()));
        names.join(", ")
    };
    let mut variants = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "full" {
            variants.push(Variant {
                name: name.to_string(),
                ablation: BTreeSet::new(),
            });
        } else if let Some(switch) = AblationSwitch::from_name(name) {
            variants.push(Variant {
                name: name.to_string(),
                ablation: [switch].into_iter().collect(),
            });
        } else {
            return Err(CliError::Usage(format!(
                "unknown variant '{name}'; valid variants: {}",
                valid()
            )));
        }
    }
    if variants.is_empty() {
        return Err(CliError::Usage(format!(
            "--variants must name at least one of: {}",
            valid()
        )));
    }
    Ok(variants)
}

fn load_games(dir: &PathBuf) -> Result<Vec<GameInstance>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("reading {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "json")
                && p.file_name().is_some_and(|f| f != "manifest.json")
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "no game files in {}",
            dir.display()
        )));
    }
    paths.iter().map(|p| load_game(p)).collect()
}

pub fn run(args: Args) -> CmdResult {
    let variants = parse_variants(&args.variants)?;
    let games = load_games(&args.games)?;
    // The output path must be writable before any work starts.
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }

    let mut jobs = Vec::new();
    for variant in &variants {
        for game in &games {
            for i in 0..args.seeds {
                jobs.push((variant.clone(), game, args.seed + i));
            }
        }
    }

    let pool = thread_pool(args.threads)?;
    let rows: Result<Vec<String>, CliError> = pool.install(|| {
        jobs.par_iter()
            .map(|(variant, game, seed)| {
                let params = EvolveParams {
                    ablation: variant.ablation.clone(),
                    seed: *seed,
                    ..EvolveParams::default()
                };
                let started = Instant::now();
                let result = solve_game(game, &params)?;
                let wall_time_ms = started.elapsed().as_millis() as u64;
                Ok(format!(
                    "{},{},{},{},{},{}",
                    variant.name,
                    game.name(),
                    seed,
                    result.best_fitness,
                    result.generations_to_best,
                    wall_time_ms
                ))
            })
            .collect()
    });

    let mut csv =
        String::from("variant,game,seed,best_fitness,generations_to_best,wall_time_ms\n");
    for row in rows? {
        csv.push_str(&row);
        csv.push('\n');
    }
    std::fs::write(&args.out, csv)?;
    println!(
        "wrote {} rows to {}",
        variants.len() * games.len() * args.seeds as usize,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
