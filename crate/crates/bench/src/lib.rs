//! Shared fixtures for the criterion benches.

use sgs_core::generator::{build_suite, GraphFamily, SuiteConfig};
use sgs_core::rng::derive_rng;
use sgs_core::strategy::{random_mixed_chromosome, Chromosome};
use sgs_core::GameInstance;

/// One generated game per density family at the given vertex count.
pub fn games_of_size(n: usize) -> Vec<GameInstance> {
    [GraphFamily::Sparse, GraphFamily::Moderate, GraphFamily::Dense]
        .into_iter()
        .map(|family| {
            let mut cfg = SuiteConfig::new(family, 1, 4242);
            cfg.sizes = Some(vec![n]);
            build_suite(&cfg).unwrap().remove(0).1
        })
        .collect()
}

/// A reproducible mixed strategy with a handful of pure strategies.
pub fn mixed_chromosome(game: &GameInstance, seed: u64) -> Chromosome {
    let mut rng = derive_rng(seed, 0, 0, 0);
    random_mixed_chromosome(game, 5, &mut rng)
}
