//! Defender strategy types: pure strategies, chromosomes (mixed strategies
//! plus signaling tables), random construction, allocation-state
//! classification, and the feasibility repair used as the memetic step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameInstance;

pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Sensor-vertex allocation state. The order fixes row indexing of
/// [`SignalingTable`]: `[unprotected, visited, adjacent]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensorState {
    /// No patroller anywhere in the neighborhood; nobody can respond.
    Unprotected,
    /// A patroller will move here in the reaction stage.
    Visited,
    /// A patroller sits on a neighboring vertex but will not visit.
    Adjacent,
}

impl SensorState {
    pub const ALL: [SensorState; 3] = [
        SensorState::Unprotected,
        SensorState::Visited,
        SensorState::Adjacent,
    ];

    pub fn index(self) -> usize {
        match self {
            SensorState::Unprotected => 0,
            SensorState::Visited => 1,
            SensorState::Adjacent => 2,
        }
    }
}

/// What a single pure strategy puts on a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationState {
    Patroller,
    Sensor(SensorState),
    Uncovered,
}

/// One defender pure strategy: where the `k` patrollers and `l` sensors go,
/// and where each patroller moves in the reaction stage. `reallocation[i]`
/// is paired with `patrollers[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PureStrategy {
    pub patrollers: Vec<usize>,
    pub sensors: Vec<usize>,
    pub reallocation: Vec<usize>,
}

impl PureStrategy {
    /// Draws a feasible pure strategy uniformly: patroller and sensor
    /// vertices form a random duplicate-free set, and each reallocation
    /// target is uniform over the patroller's closed neighborhood.
    pub fn random(game: &GameInstance, rng: &mut impl Rng) -> Self {
        let n = game.num_vertices();
        let k = game.num_patrollers();
        let l = game.num_sensors();
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..(k + l) {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        let patrollers = pool[..k].to_vec();
        let sensors = pool[k..k + l].to_vec();
        let reallocation = patrollers
            .iter()
            .map(|&p| random_move(game, p, rng))
            .collect();
        PureStrategy {
            patrollers,
            sensors,
            reallocation,
        }
    }
}

/// Uniform draw from `neighbors(p) ∪ {p}` (staying put is always allowed).
pub fn random_move(game: &GameInstance, p: usize, rng: &mut impl Rng) -> usize {
    let nb = game.graph().neighbors(p);
    let choice = rng.gen_range(0..=nb.len());
    if choice == nb.len() {
        p
    } else {
        nb[choice]
    }
}

/// Signaling probabilities per allocation state and vertex. `psi` applies
/// when the sensor detected the adversary, `phi` when it did not; both give
/// the probability of sending the weak signal `s0` (the strong signal `s1`
/// is sent with the complementary probability).
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingTable {
    pub psi: [Vec<f64>; 3],
    pub phi: [Vec<f64>; 3],
}

impl SignalingTable {
    pub fn random(num_vertices: usize, rng: &mut impl Rng) -> Self {
        let mut row = |_: usize| (0..num_vertices).map(|_| rng.gen::<f64>()).collect();
        let psi = [row(0), row(1), row(2)];
        let phi = [row(0), row(1), row(2)];
        SignalingTable { psi, phi }
    }

    pub fn num_vertices(&self) -> usize {
        self.psi[0].len()
    }

    /// Probability of sending `s0` on detection.
    pub fn psi(&self, state: SensorState, vertex: usize) -> f64 {
        self.psi[state.index()][vertex]
    }

    /// Probability of sending `s0` on a missed detection.
    pub fn phi(&self, state: SensorState, vertex: usize) -> f64 {
        self.phi[state.index()][vertex]
    }

    /// Element-wise mean of two tables.
    pub fn mean_of(a: &SignalingTable, b: &SignalingTable) -> SignalingTable {
        let mix = |x: &[Vec<f64>; 3], y: &[Vec<f64>; 3]| {
            [0, 1, 2].map(|s| {
                x[s].iter()
                    .zip(&y[s])
                    .map(|(p, q)| 0.5 * (p + q))
                    .collect()
            })
        };
        SignalingTable {
            psi: mix(&a.psi, &b.psi),
            phi: mix(&a.phi, &b.phi),
        }
    }

    /// Total number of entries (`6 * num_vertices`).
    pub fn num_entries(&self) -> usize {
        6 * self.num_vertices()
    }

    /// Mutable access to the flat entry `idx`, ordered psi rows then phi rows.
    pub fn entry_mut(&mut self, idx: usize) -> &mut f64 {
        let n = self.num_vertices();
        let (table, rest) = if idx < 3 * n {
            (&mut self.psi, idx)
        } else {
            (&mut self.phi, idx - 3 * n)
        };
        &mut table[rest / n][rest % n]
    }
}

/// A pure strategy together with its probability in a mixed strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedStrategy {
    pub strategy: PureStrategy,
    pub prob: f64,
}

/// A candidate solution: a mixed strategy over pure strategies plus one
/// signaling table, with the last evaluation cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub strategies: Vec<WeightedStrategy>,
    pub signaling: SignalingTable,
    pub cached_fitness: Option<f64>,
    /// Target vertex of the adversary best response from the last
    /// evaluation; consumed by the coverage-improvement mutation.
    pub cached_adv_target: Option<usize>,
}

impl Chromosome {
    /// Initial-population individual: a single pure strategy with
    /// probability 1 and uniformly random signaling entries.
    pub fn random(game: &GameInstance, rng: &mut impl Rng) -> Self {
        let strategy = PureStrategy::random(game, rng);
        let signaling = SignalingTable::random(game.num_vertices(), rng);
        Chromosome {
            strategies: vec![WeightedStrategy {
                strategy,
                prob: 1.0,
            }],
            signaling,
            cached_fitness: None,
            cached_adv_target: None,
        }
    }

    pub fn strategy_count(&self) -> usize {
        self.strategies.len()
    }

    pub fn invalidate_cache(&mut self) {
        self.cached_fitness = None;
        self.cached_adv_target = None;
    }
}

/// Random mixed strategy with up to `max_strategies` pure strategies; used
/// by the validation harness and tests to cover multi-entry chromosomes.
pub fn random_mixed_chromosome(
    game: &GameInstance,
    max_strategies: usize,
    rng: &mut impl Rng,
) -> Chromosome {
    let count = rng.gen_range(1..=max_strategies.max(1));
    let mut strategies: Vec<WeightedStrategy> = (0..count)
        .map(|_| WeightedStrategy {
            strategy: PureStrategy::random(game, rng),
            prob: rng.gen_range(0.05..1.0),
        })
        .collect();
    let total: f64 = strategies.iter().map(|w| w.prob).sum();
    for w in &mut strategies {
        w.prob /= total;
    }
    Chromosome {
        strategies,
        signaling: SignalingTable::random(game.num_vertices(), rng),
        cached_fitness: None,
        cached_adv_target: None,
    }
}

#[derive(Serialize, Deserialize)]
struct WeightedStrategyWire {
    patrollers: Vec<usize>,
    sensors: Vec<usize>,
    reallocation: Vec<usize>,
    prob: f64,
}

#[derive(Serialize, Deserialize)]
struct ChromosomeWire {
    strategies: Vec<WeightedStrategyWire>,
    psi: [Vec<f64>; 3],
    phi: [Vec<f64>; 3],
}

/// Encodes a chromosome in the strategy JSON schema (signaling rows in
/// state order unprotected, visited, adjacent).
pub fn chromosome_to_json(ch: &Chromosome) -> String {
    let wire = ChromosomeWire {
        strategies: ch
            .strategies
            .iter()
            .map(|w| WeightedStrategyWire {
                patrollers: w.strategy.patrollers.clone(),
                sensors: w.strategy.sensors.clone(),
                reallocation: w.strategy.reallocation.clone(),
                prob: w.prob,
            })
            .collect(),
        psi: ch.signaling.psi.clone(),
        phi: ch.signaling.phi.clone(),
    };
    serde_json::to_string(&wire).expect("strategy encoding")
}

/// Decodes a chromosome and validates it against the game.
pub fn chromosome_from_json(text: &str, game: &GameInstance) -> Result<Chromosome> {
    let wire: ChromosomeWire =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("strategy JSON: {e}")))?;
    let ch = Chromosome {
        strategies: wire
            .strategies
            .into_iter()
            .map(|w| WeightedStrategy {
                strategy: PureStrategy {
                    patrollers: w.patrollers,
                    sensors: w.sensors,
                    reallocation: w.reallocation,
                },
                prob: w.prob,
            })
            .collect(),
        signaling: SignalingTable {
            psi: wire.psi,
            phi: wire.phi,
        },
        cached_fitness: None,
        cached_adv_target: None,
    };
    validate_chromosome(&ch, game)?;
    Ok(ch)
}

/// Classifies what `strategy` puts on vertex `v`.
///
/// Total over infeasible strategies as well (needed when the repair step is
/// ablated): a patroller on `v` wins over a co-located sensor, and a
/// reallocation entry counts only if the move it encodes is legal.
pub fn allocation_state(strategy: &PureStrategy, game: &GameInstance, v: usize) -> AllocationState {
    if strategy.patrollers.contains(&v) {
        return AllocationState::Patroller;
    }
    if strategy.sensors.contains(&v) {
        let state = if reallocated_to(strategy, game, v) {
            SensorState::Visited
        } else if strategy
            .patrollers
            .iter()
            .any(|&p| game.graph().has_edge(p, v))
        {
            SensorState::Adjacent
        } else {
            SensorState::Unprotected
        };
        return AllocationState::Sensor(state);
    }
    AllocationState::Uncovered
}

/// True iff some patroller legally moves to `v` in the reaction stage.
pub fn reallocated_to(strategy: &PureStrategy, game: &GameInstance, v: usize) -> bool {
    strategy
        .reallocation
        .iter()
        .zip(&strategy.patrollers)
        .any(|(&r, &p)| r == v && (p == v || game.graph().has_edge(p, v)))
}

/// Feasibility repair (the memetic local-optimization step), in place.
///
/// Duplicate allocation vertices are resolved first: slots are scanned in
/// order patrollers then sensors, the first occurrence keeps its vertex, and
/// every later duplicate is reassigned uniformly to a currently unoccupied
/// vertex. Then every reallocation entry that encodes an illegal move is
/// redrawn uniformly from the (possibly updated) patroller's closed
/// neighborhood. A feasible strategy is returned unchanged.
pub fn repair(strategy: &mut PureStrategy, game: &GameInstance, rng: &mut impl Rng) {
    let n = game.num_vertices();
    let mut occupied = vec![false; n];
    let k = strategy.patrollers.len();
    for slot in 0..k + strategy.sensors.len() {
        let v = if slot < k {
            &mut strategy.patrollers[slot]
        } else {
            &mut strategy.sensors[slot - k]
        };
        if occupied[*v] {
            let free: Vec<usize> = (0..n).filter(|&u| !occupied[u]).collect();
            *v = free[rng.gen_range(0..free.len())];
        }
        occupied[*v] = true;
    }
    for i in 0..strategy.reallocation.len() {
        let p = strategy.patrollers[i];
        let r = strategy.reallocation[i];
        if r != p && !game.graph().has_edge(p, r) {
            strategy.reallocation[i] = random_move(game, p, rng);
        }
    }
}

/// Checks every pure-strategy invariant: list lengths, vertex ranges,
/// duplicate-free allocations, and legal reallocation moves.
pub fn validate_pure_strategy(strategy: &PureStrategy, game: &GameInstance) -> Result<()> {
    let n = game.num_vertices();
    if strategy.patrollers.len() != game.num_patrollers() {
        return Err(Error::validation(
            "patrollers",
            format!(
                "expected {} entries, got {}",
                game.num_patrollers(),
                strategy.patrollers.len()
            ),
        ));
    }
    if strategy.sensors.len() != game.num_sensors() {
        return Err(Error::validation(
            "sensors",
            format!(
                "expected {} entries, got {}",
                game.num_sensors(),
                strategy.sensors.len()
            ),
        ));
    }
    if strategy.reallocation.len() != strategy.patrollers.len() {
        return Err(Error::validation(
            "reallocation",
            "must pair one entry with every patroller",
        ));
    }
    let mut seen = vec![false; n];
    for &v in strategy.patrollers.iter().chain(&strategy.sensors) {
        if v >= n {
            return Err(Error::validation("allocation", format!("vertex {v} out of range")));
        }
        if seen[v] {
            return Err(Error::validation(
                "allocation",
                format!("vertex {v} assigned to more than one resource"),
            ));
        }
        seen[v] = true;
    }
    for (i, (&p, &r)) in strategy
        .patrollers
        .iter()
        .zip(&strategy.reallocation)
        .enumerate()
    {
        if r >= n {
            return Err(Error::validation(
                "reallocation",
                format!("vertex {r} out of range"),
            ));
        }
        if r != p && !game.graph().has_edge(p, r) {
            return Err(Error::validation(
                "reallocation",
                format!("patroller {i} cannot move {p} -> {r}: no such edge"),
            ));
        }
    }
    Ok(())
}

/// Checks every chromosome invariant: feasible pure strategies, a
/// probability vector on the simplex, and signaling entries in `[0, 1]`.
pub fn validate_chromosome(ch: &Chromosome, game: &GameInstance) -> Result<()> {
    if ch.strategies.is_empty() {
        return Err(Error::validation("strategies", "must be non-empty"));
    }
    let mut total = 0.0;
    for (i, w) in ch.strategies.iter().enumerate() {
        if !w.prob.is_finite() || w.prob <= 0.0 || w.prob > 1.0 + PROB_SUM_TOLERANCE {
            return Err(Error::validation(
                format!("strategies[{i}].prob"),
                format!("must lie in (0, 1], got {}", w.prob),
            ));
        }
        total += w.prob;
        validate_pure_strategy(&w.strategy, game)?;
    }
    if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
        return Err(Error::validation(
            "strategies",
            format!("probabilities must sum to 1, got {total}"),
        ));
    }
    if ch.signaling.num_vertices() != game.num_vertices() {
        return Err(Error::validation(
            "signaling",
            format!(
                "expected {} columns, got {}",
                game.num_vertices(),
                ch.signaling.num_vertices()
            ),
        ));
    }
    for table in [&ch.signaling.psi, &ch.signaling.phi] {
        for row in table {
            for &p in row {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::validation(
                        "signaling",
                        format!("entry {p} outside [0, 1]"),
                    ));
                }
            }
        }
    }
    Ok(())
}
