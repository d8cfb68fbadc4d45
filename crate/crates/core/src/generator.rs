//! Benchmark game generation: four graph families, utility sampling, and
//! resource-count formulas.
//!
//! Sparse, moderate, and dense games use Watts-Strogatz graphs with mean
//! degree 2, about half the vertex count, and the vertex count minus 2
//! respectively. Locally-dense graphs are deterministic rings or hubs of
//! cliques. Erdos-Renyi graphs cover the independent-edge regime. Every
//! sampled float is quantized so the emitted files are exactly reproducible
//! from the suite seed.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{quantize_float, GameInstance, Graph, UncertaintyMatrix, VertexUtilities};
use crate::rng::derive_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFamily {
    Sparse,
    Moderate,
    Dense,
    LocallyDense,
    ErdosRenyi,
}

impl GraphFamily {
    pub const ALL: [GraphFamily; 5] = [
        GraphFamily::Sparse,
        GraphFamily::Moderate,
        GraphFamily::Dense,
        GraphFamily::LocallyDense,
        GraphFamily::ErdosRenyi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphFamily::Sparse => "sparse",
            GraphFamily::Moderate => "moderate",
            GraphFamily::Dense => "dense",
            GraphFamily::LocallyDense => "locally-dense",
            GraphFamily::ErdosRenyi => "erdos-renyi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Watts-Strogatz mean degree for the three density families, kept even
    /// as the model requires (the moderate family rounds n/2 down to even).
    pub fn mean_degree(self, n: usize) -> Option<usize> {
        match self {
            GraphFamily::Sparse => Some(2),
            GraphFamily::Moderate => Some((n / 2) & !1),
            GraphFamily::Dense => Some(n - 2),
            _ => None,
        }
    }
}

/// Per-vertex utility sampling ranges. Catching the adversary is always
/// worth less to the defender than a successful attack is to the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityRanges {
    pub adv_success: (f64, f64),
    pub adv_caught: (f64, f64),
    pub def_attacked: (f64, f64),
    pub def_caught_min: f64,
    pub def_caught_cap: f64,
}

impl Default for UtilityRanges {
    fn default() -> Self {
        UtilityRanges {
            adv_success: (50.0, 400.0),
            adv_caught: (-400.0, -50.0),
            def_attacked: (-400.0, -50.0),
            def_caught_min: 10.0,
            def_caught_cap: 100.0,
        }
    }
}

/// Configuration of one benchmark suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub family: GraphFamily,
    /// Vertex counts for the Watts-Strogatz and Erdos-Renyi families;
    /// `None` runs the standard ladder 10, 20, ..., 100.
    pub sizes: Option<Vec<usize>>,
    /// Locally-dense setting; `None` runs the full grid of clique counts
    /// and sizes 3..=10 under all three rules.
    pub cliques: Option<usize>,
    pub clique_size: Option<usize>,
    pub rule: Option<u8>,
    pub games_per_setting: usize,
    pub ws_beta: f64,
    pub er_edge_prob: f64,
    pub utility_ranges: UtilityRanges,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(family: GraphFamily, games_per_setting: usize, seed: u64) -> Self {
        SuiteConfig {
            family,
            sizes: None,
            cliques: None,
            clique_size: None,
            rule: None,
            games_per_setting,
            ws_beta: 0.3,
            er_edge_prob: 0.3,
            utility_ranges: UtilityRanges::default(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.games_per_setting == 0 {
            return Err(Error::Config("games_per_setting must be positive".into()));
        }
        if self.family == GraphFamily::LocallyDense {
            let given = [
                self.cliques.is_some(),
                self.clique_size.is_some(),
                self.rule.is_some(),
            ];
            if given.iter().any(|&g| g) && !given.iter().all(|&g| g) {
                return Err(Error::Config(
                    "locally-dense settings need cliques, clique_size, and rule together".into(),
                ));
            }
            if let (Some(c), Some(n), Some(r)) = (self.cliques, self.clique_size, self.rule) {
                check_locally_dense(c, n, r)?;
            }
        } else if self.cliques.is_some() || self.clique_size.is_some() || self.rule.is_some() {
            return Err(Error::Config(format!(
                "clique settings only apply to locally-dense, not {}",
                self.family.name()
            )));
        }
        if !(0.0..=1.0).contains(&self.ws_beta) || !(0.0..=1.0).contains(&self.er_edge_prob) {
            return Err(Error::Config("edge probabilities must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Standard Watts-Strogatz graph: a ring lattice joining each vertex to
/// `mean_degree / 2` neighbors per side, then each lattice edge rewired with
/// probability `beta` to a uniformly drawn duplicate-free endpoint.
/// Connectedness is not enforced; the edge count is always `n * mean_degree / 2`.
pub fn gen_watts_strogatz(
    n: usize,
    mean_degree: usize,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<Graph> {
    if mean_degree % 2 != 0 {
        return Err(Error::Generation(format!(
            "mean degree must be even, got {mean_degree}"
        )));
    }
    if mean_degree >= n {
        return Err(Error::Generation(format!(
            "mean degree {mean_degree} must be below the vertex count {n}"
        )));
    }
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    for step in 1..=mean_degree / 2 {
        for u in 0..n {
            edges.insert(key(u, (u + step) % n));
        }
    }
    let mut degree = vec![0usize; n];
    for &(u, v) in &edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    for step in 1..=mean_degree / 2 {
        for u in 0..n {
            if rng.gen::<f64>() >= beta {
                continue;
            }
            let old = key(u, (u + step) % n);
            if !edges.contains(&old) || degree[u] >= n - 1 {
                // Already rewired away by an earlier round, or no free slot.
                continue;
            }
            let new_endpoint = loop {
                let w = rng.gen_range(0..n);
                if w != u && !edges.contains(&key(u, w)) {
                    break w;
                }
            };
            edges.remove(&old);
            degree[old.0] -= 1;
            degree[old.1] -= 1;
            edges.insert(key(u, new_endpoint));
            degree[u] += 1;
            degree[new_endpoint] += 1;
        }
    }
    let list: Vec<(usize, usize)> = edges.into_iter().collect();
    Graph::new(n, &list)
}

/// Erdos-Renyi G(n, p): every vertex pair joined independently.
pub fn gen_erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Generation(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges)
}

fn check_locally_dense(cliques: usize, clique_size: usize, rule: u8) -> Result<()> {
    if !(1..=3).contains(&rule) {
        return Err(Error::Generation(format!(
            "connection rule must be 1, 2, or 3, got {rule}"
        )));
    }
    if cliques < 3 || clique_size < 3 {
        return Err(Error::Generation(format!(
            "need at least 3 cliques of size at least 3, got {cliques} of size {clique_size}"
        )));
    }
    Ok(())
}

/// Deterministic ring or hub of cliques. Clique `i` occupies the vertex
/// block `[i * size, (i + 1) * size)` and its designated vertex is the
/// block's first vertex.
///
/// - rule 1: designated vertices linked around a ring of cliques,
/// - rule 2: vertex `t` of each clique linked to vertex `t` of both ring
///   neighbors,
/// - rule 3: designated vertices pairwise linked (a hub clique).
pub fn gen_locally_dense(cliques: usize, clique_size: usize, rule: u8) -> Result<Graph> {
    check_locally_dense(cliques, clique_size, rule)?;
    let mut edges = Vec::new();
    for c in 0..cliques {
        let base = c * clique_size;
        for a in 0..clique_size {
            for b in a + 1..clique_size {
                edges.push((base + a, base + b));
            }
        }
    }
    match rule {
        1 => {
            for c in 0..cliques {
                edges.push((c * clique_size, ((c + 1) % cliques) * clique_size));
            }
        }
        2 => {
            for c in 0..cliques {
                let next = (c + 1) % cliques;
                for t in 0..clique_size {
                    edges.push((c * clique_size + t, next * clique_size + t));
                }
            }
        }
        3 => {
            for a in 0..cliques {
                for b in a + 1..cliques {
                    edges.push((a * clique_size, b * clique_size));
                }
            }
        }
        _ => unreachable!("validated above"),
    }
    Graph::new(cliques * clique_size, &edges)
}

/// Resource counts from the vertex count: `k = round(sqrt(n/2))` clamped to
/// at least one patroller, `l = round(2n/3 - k)` clamped to the remaining
/// capacity.
pub fn resource_counts(n: usize) -> (usize, usize) {
    let k = ((n as f64 / 2.0).sqrt().round() as usize).max(1);
    let l_raw = (2.0 / 3.0 * n as f64 - k as f64).round();
    let l = if l_raw < 0.0 { 0 } else { l_raw as usize }.min(n.saturating_sub(k));
    (k, l)
}

/// Samples a full game on the given graph: resource counts from the vertex
/// count, `gamma` and `kappa` uniform on `[0, 1]`, and per-vertex utilities
/// from the configured ranges.
pub fn gen_game(
    graph: Graph,
    cfg: &SuiteConfig,
    name: &str,
    rng: &mut impl Rng,
) -> Result<GameInstance> {
    let n = graph.num_vertices();
    let (k, l) = resource_counts(n);
    if k + l > n {
        return Err(Error::Generation(format!(
            "graph with {n} vertices is too small for {k} patrollers and {l} sensors"
        )));
    }
    let gamma = quantize_float(rng.gen::<f64>());
    let kappa = quantize_float(rng.gen::<f64>());
    // Derived entries (kappa/2, 1-kappa) are quantized as well so the
    // instance survives canonical serialization bit-exactly.
    let mut pi_rows = *UncertaintyMatrix::from_kappa(kappa)?.rows();
    for row in &mut pi_rows {
        for p in row {
            *p = quantize_float(*p);
        }
    }
    let pi = UncertaintyMatrix::new(pi_rows)?;
    let ranges = &cfg.utility_ranges;
    let utilities: Vec<VertexUtilities> = (0..n)
        .map(|_| {
            let adv_success = quantize_float(rng.gen_range(ranges.adv_success.0..ranges.adv_success.1));
            let adv_caught = quantize_float(rng.gen_range(ranges.adv_caught.0..ranges.adv_caught.1));
            let def_attacked =
                quantize_float(rng.gen_range(ranges.def_attacked.0..ranges.def_attacked.1));
            let def_cap = ranges.def_caught_cap.min(adv_success);
            let def_caught = quantize_float(rng.gen_range(ranges.def_caught_min..def_cap));
            VertexUtilities {
                def_caught,
                def_attacked,
                adv_success,
                adv_caught,
            }
        })
        .collect();
    GameInstance::new(name, graph, k, l, gamma, pi, utilities)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub n: usize,
    pub k: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub family: String,
    pub seed: u64,
    pub games: Vec<ManifestEntry>,
}

/// Builds every game of the suite in memory, paired with its file name.
pub fn build_suite(cfg: &SuiteConfig) -> Result<Vec<(String, GameInstance)>> {
    cfg.validate()?;
    let mut settings: Vec<(String, Setting)> = Vec::new();
    match cfg.family {
        GraphFamily::LocallyDense => {
            let grid: Vec<(usize, usize, u8)> = match (cfg.cliques, cfg.clique_size, cfg.rule) {
                (Some(c), Some(n), Some(r)) => vec![(c, n, r)],
                _ => {
                    let mut grid = Vec::new();
                    for c in 3..=10 {
                        for n in 3..=10 {
                            for r in 1..=3 {
                                grid.push((c, n, r));
                            }
                        }
                    }
                    grid
                }
            };
            for (c, n, r) in grid {
                settings.push((format!("{c:02}_{n:02}_{r}"), Setting::Cliques(c, n, r)));
            }
        }
        family => {
            let sizes = cfg
                .sizes
                .clone()
                .unwrap_or_else(|| (1..=10).map(|i| i * 10).collect());
            for n in sizes {
                settings.push((format!("{}_n{n:03}", family.name()), Setting::Size(n)));
            }
        }
    }

    let mut out = Vec::new();
    for (setting_idx, (stem, setting)) in settings.iter().enumerate() {
        for i in 0..cfg.games_per_setting {
            let mut rng = derive_rng(cfg.seed, setting_idx as u64, i as u64, 0);
            let name = if cfg.games_per_setting == 1 {
                stem.clone()
            } else {
                format!("{stem}_{i:02}")
            };
            let graph = match *setting {
                Setting::Cliques(c, n, r) => gen_locally_dense(c, n, r)?,
                Setting::Size(n) => match cfg.family {
                    GraphFamily::ErdosRenyi => gen_erdos_renyi(n, cfg.er_edge_prob, &mut rng)?,
                    family => {
                        let degree = family.mean_degree(n).expect("density family");
                        gen_watts_strogatz(n, degree, cfg.ws_beta, &mut rng)?
                    }
                },
            };
            let game = gen_game(graph, cfg, &name, &mut rng)?;
            out.push((format!("{name}.json"), game));
        }
    }
    Ok(out)
}

/// Generates the suite on disk: one canonical game file per instance plus a
/// `manifest.json` listing them.
pub fn gen_suite(cfg: &SuiteConfig, out_dir: &Path) -> Result<SuiteManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let games = build_suite(cfg)?;
    let mut manifest = SuiteManifest {
        family: cfg.family.name().to_string(),
        seed: cfg.seed,
        games: Vec::with_capacity(games.len()),
    };
    for (file, game) in &games {
        std::fs::write(out_dir.join(file), game.to_canonical_json())?;
        manifest.games.push(ManifestEntry {
            file: file.clone(),
            n: game.num_vertices(),
            k: game.num_patrollers(),
            l: game.num_sensors(),
        });
    }
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest encoding"),
    )?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy)]
enum Setting {
    Size(usize),
    Cliques(usize, usize, u8),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ws_without_rewiring_is_a_ring() {
        let mut rng = derive_rng(1, 0, 0, 0);
        let g = gen_watts_strogatz(10, 2, 0.0, &mut rng).unwrap();
        assert_eq!(g.num_edges(), 10);
        for v in 0..10 {
            assert_eq!(g.degree(v), 2);
            assert!(g.has_edge(v, (v + 1) % 10));
        }
    }

    #[test]
    fn ws_edge_count_is_invariant_under_rewiring() {
        for beta in [0.0, 0.3, 0.7, 1.0] {
            for (n, degree) in [(10, 2), (20, 10), (10, 8), (50, 24)] {
                let mut rng = derive_rng(2, n as u64, degree as u64, (beta * 10.0) as u64);
                let g = gen_watts_strogatz(n, degree, beta, &mut rng).unwrap();
                assert_eq!(g.num_edges(), n * degree / 2, "n={n} degree={degree} beta={beta}");
            }
        }
    }

    #[test]
    fn ws_dense_family_has_full_degree_without_rewiring() {
        let mut rng = derive_rng(3, 0, 0, 0);
        let g = gen_watts_strogatz(10, 8, 0.0, &mut rng).unwrap();
        for v in 0..10 {
            assert_eq!(g.degree(v), 8);
        }
    }

    #[test]
    fn ws_rejects_odd_or_oversized_degree() {
        let mut rng = derive_rng(4, 0, 0, 0);
        assert!(gen_watts_strogatz(10, 3, 0.0, &mut rng).is_err());
        assert!(gen_watts_strogatz(10, 10, 0.0, &mut rng).is_err());
    }

    #[test]
    fn er_extreme_probabilities() {
        let mut rng = derive_rng(5, 0, 0, 0);
        let empty = gen_erdos_renyi(8, 0.0, &mut rng).unwrap();
        assert_eq!(empty.num_edges(), 0);
        let complete = gen_erdos_renyi(8, 1.0, &mut rng).unwrap();
        assert_eq!(complete.num_edges(), 28);
    }

    #[test]
    fn er_mean_edge_count_matches_binomial() {
        let mut rng = derive_rng(6, 0, 0, 0);
        let draws = 1000;
        let mut total = 0usize;
        for _ in 0..draws {
            total += gen_erdos_renyi(20, 0.3, &mut rng).unwrap().num_edges();
        }
        let mean = total as f64 / draws as f64;
        assert!((mean - 57.0).abs() <= 3.0, "mean {mean}");
    }

    #[test]
    fn locally_dense_edge_counts_match_closed_forms() {
        let g = gen_locally_dense(3, 6, 1).unwrap();
        assert_eq!(g.num_vertices(), 18);
        assert_eq!(g.num_edges(), 48);

        let g = gen_locally_dense(3, 6, 2).unwrap();
        assert_eq!(g.num_edges(), 63);

        let g = gen_locally_dense(6, 6, 3).unwrap();
        assert_eq!(g.num_edges(), 105);
    }

    #[test]
    fn locally_dense_rejects_bad_settings() {
        assert!(gen_locally_dense(2, 6, 1).is_err());
        assert!(gen_locally_dense(4, 2, 1).is_err());
        assert!(gen_locally_dense(4, 4, 0).is_err());
        assert!(gen_locally_dense(4, 4, 4).is_err());
    }

    #[test]
    fn resource_formulas_match_known_points() {
        assert_eq!(resource_counts(18), (3, 9));
        assert_eq!(resource_counts(50), (5, 28));
        assert_eq!(resource_counts(10), (2, 5));
        assert_eq!(resource_counts(100), (7, 60));
    }

    #[test]
    fn generated_games_are_valid_and_ordered() {
        let cfg = SuiteConfig::new(GraphFamily::Sparse, 2, 11);
        let mut rng = derive_rng(11, 9, 9, 9);
        for _ in 0..20 {
            let graph = gen_erdos_renyi(12, 0.4, &mut rng).unwrap();
            let game = gen_game(graph, &cfg, "g", &mut rng).unwrap();
            for v in 0..game.num_vertices() {
                let u = game.utilities(v);
                assert!(u.def_caught < u.adv_success);
            }
            // Survives a canonical round trip.
            let reloaded = GameInstance::from_json(&game.to_canonical_json()).unwrap();
            assert_eq!(reloaded, game);
        }
    }

    #[test]
    fn suite_counts_and_names() {
        let mut cfg = SuiteConfig::new(GraphFamily::Sparse, 5, 3);
        cfg.sizes = None;
        let games = build_suite(&cfg).unwrap();
        assert_eq!(games.len(), 50);
        assert!(games.iter().any(|(f, _)| f == "sparse_n010_00.json"));

        let mut cfg = SuiteConfig::new(GraphFamily::LocallyDense, 1, 3);
        cfg.cliques = Some(4);
        cfg.clique_size = Some(6);
        cfg.rule = Some(1);
        let games = build_suite(&cfg).unwrap();
        assert_eq!(games.len(), 1);
        assert_eq!(games[0].0, "04_06_1.json");

        let mut cfg = SuiteConfig::new(GraphFamily::LocallyDense, 1, 3);
        cfg.cliques = None;
        cfg.clique_size = None;
        cfg.rule = None;
        let games = build_suite(&cfg).unwrap();
        assert_eq!(games.len(), 8 * 8 * 3);
    }

    #[test]
    fn suite_regeneration_is_byte_identical() {
        let mut cfg = SuiteConfig::new(GraphFamily::Moderate, 2, 77);
        cfg.sizes = Some(vec![10, 20]);
        let a = build_suite(&cfg).unwrap();
        let b = build_suite(&cfg).unwrap();
        assert_eq!(a.len(), 4);
        for ((fa, ga), (fb, gb)) in a.iter().zip(&b) {
            assert_eq!(fa, fb);
            assert_eq!(ga.to_canonical_json(), gb.to_canonical_json());
        }
    }
}
