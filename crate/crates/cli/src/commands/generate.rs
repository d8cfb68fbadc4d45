use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sgs_core::generator::{gen_suite, GraphFamily, SuiteConfig};

use super::{CliError, CmdResult};

#[derive(Parser)]
pub struct Args {
    /// Graph family: sparse, moderate, dense, locally-dense, or erdos-renyi.
    #[arg(long, value_parser = parse_family)]
    family: GraphFamily,
    /// Vertex count for sparse/moderate/dense/erdos-renyi; omit for the
    /// standard ladder 10, 20, ..., 100.
    #[arg(long, conflicts_with_all = ["cliques", "clique_size", "rule"])]
    n: Option<usize>,
    /// Clique count for locally-dense; omit for the full 3..=10 grid.
    #[arg(long, requires = "clique_size", requires = "rule")]
    cliques: Option<usize>,
    #[arg(long, requires = "cliques")]
    clique_size: Option<usize>,
    /// Inter-clique connection rule.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), requires = "cliques")]
    rule: Option<u8>,
    /// Games per setting.
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    /// Output directory for the game files and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Watts-Strogatz rewiring probability.
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    /// Erdos-Renyi edge probability.
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
}

fn parse_family(name: &str) -> Result<GraphFamily, String> {
    GraphFamily::from_name(name).ok_or_else(|| {
        format!(
            "valid families: {}",
            GraphFamily::ALL
                .iter()
                .map(|f| f.name())
                .collect::<Vec<_>>()
                .join(", ")
        )
    })
}

pub fn run(args: Args) -> CmdResult {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    if args.family == GraphFamily::LocallyDense && args.n.is_some() {
        return Err(CliError::Usage(
            "--n does not apply to locally-dense; use --cliques/--clique-size/--rule".into(),
        ));
    }
    if args.family != GraphFamily::LocallyDense && args.cliques.is_some() {
        return Err(CliError::Usage(format!(
            "clique settings only apply to locally-dense, not {}",
            args.family.name()
        )));
    }
    let mut cfg = SuiteConfig::new(args.family, args.count, args.seed);
    cfg.sizes = args.n.map(|n| vec![n]);
    cfg.cliques = args.cliques;
    cfg.clique_size = args.clique_size;
    cfg.rule = args.rule;
    cfg.ws_beta = args.beta;
    cfg.er_edge_prob = args.edge_prob;
    let manifest = gen_suite(&cfg, &args.out)?;
    println!(
        "wrote {} game(s) and manifest.json to {}",
        manifest.games.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
