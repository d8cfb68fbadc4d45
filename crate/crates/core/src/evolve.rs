//! The evolutionary solver loop: initialization, utility-weighted crossover
//! with pruning, three mutation families with retry, elitist tournament
//! selection, and stagnation-triggered population refresh.
//!
//! Every stochastic stage draws from a stream derived from `(seed, phase,
//! generation, item)`, so distributing work over threads never changes the
//! result: same seed and parameters give bit-identical output at any
//! `--threads` setting.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{best_response, evaluate, pure_strategy_utility};
use crate::game::GameInstance;
use crate::rng::derive_rng;
use crate::strategy::{random_move, repair, Chromosome, SignalingTable, WeightedStrategy};

/// Minimum fitness gain that counts as an improvement, both for the mutation
/// retry loop and for stagnation detection.
pub const FITNESS_TOLERANCE: f64 = 1e-9;

/// Runtime switches that disable or replace one solver component each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationSwitch {
    NoCrossover,
    NoMutation,
    NoM1,
    NoM2,
    NoM3,
    NoLocalOpt,
    NoRefresh,
    NoCrossoverRemoval,
    LegacyCrossover,
}

impl AblationSwitch {
    pub const ALL: [AblationSwitch; 9] = [
        AblationSwitch::NoCrossover,
        AblationSwitch::NoMutation,
        AblationSwitch::NoM1,
        AblationSwitch::NoM2,
        AblationSwitch::NoM3,
        AblationSwitch::NoLocalOpt,
        AblationSwitch::NoRefresh,
        AblationSwitch::NoCrossoverRemoval,
        AblationSwitch::LegacyCrossover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationSwitch::NoCrossover => "no_crossover",
            AblationSwitch::NoMutation => "no_mutation",
            AblationSwitch::NoM1 => "no_m1",
            AblationSwitch::NoM2 => "no_m2",
            AblationSwitch::NoM3 => "no_m3",
            AblationSwitch::NoLocalOpt => "no_local_opt",
            AblationSwitch::NoRefresh => "no_refresh",
            AblationSwitch::NoCrossoverRemoval => "no_crossover_removal",
            AblationSwitch::LegacyCrossover => "legacy_crossover",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.name() == name)
    }
}

/// Solver parameters. Defaults are the tuned values used throughout the
/// benchmark experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveParams {
    pub n_pop: usize,
    pub n_gen: usize,
    /// Stagnant generations before half the population is refreshed.
    pub n_ref: usize,
    pub p_c: f64,
    pub p_m: f64,
    /// Probability that the better tournament contestant is promoted.
    pub p_sp: f64,
    /// Mutation attempts before the last result is kept regardless.
    pub m_limit: usize,
    /// Elite individuals promoted unconditionally.
    pub n_e: usize,
    pub ablation: BTreeSet<AblationSwitch>,
    pub seed: u64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        EvolveParams {
            n_pop: 200,
            n_gen: 2000,
            n_ref: 300,
            p_c: 0.5,
            p_m: 0.8,
            p_sp: 0.8,
            m_limit: 10,
            n_e: 2,
            ablation: BTreeSet::new(),
            seed: 0,
        }
    }
}

impl EvolveParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_pop < 2 {
            return Err(Error::Config("n_pop must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.p_c) || !(0.0..=1.0).contains(&self.p_m) {
            return Err(Error::Config("p_c and p_m must lie in [0, 1]".into()));
        }
        if !(0.5..=1.0).contains(&self.p_sp) {
            return Err(Error::Config("p_sp must lie in [0.5, 1]".into()));
        }
        if self.n_e >= self.n_pop {
            return Err(Error::Config("n_e must be smaller than n_pop".into()));
        }
        if self.m_limit == 0 {
            return Err(Error::Config("m_limit must be at least 1".into()));
        }
        if self.n_ref == 0 {
            return Err(Error::Config("n_ref must be at least 1".into()));
        }
        Ok(())
    }

    pub fn is_enabled(&self, switch: AblationSwitch) -> bool {
        !self.ablation.contains(&switch)
    }

    fn local_opt_enabled(&self) -> bool {
        self.is_enabled(AblationSwitch::NoLocalOpt)
    }

    fn enabled_mutations(&self) -> Vec<MutationKind> {
        if !self.is_enabled(AblationSwitch::NoMutation) {
            return Vec::new();
        }
        let mut kinds = Vec::new();
        if self.is_enabled(AblationSwitch::NoM1) {
            kinds.push(MutationKind::Probability);
        }
        if self.is_enabled(AblationSwitch::NoM2) {
            kinds.push(MutationKind::Allocation);
            kinds.push(MutationKind::Signaling);
        }
        if self.is_enabled(AblationSwitch::NoM3) {
            kinds.push(MutationKind::Coverage);
        }
        kinds
    }
}

/// One per-generation history row. `wall_time_ms` is kept at zero so solver
/// output stays byte-identical across runs and thread counts; measured
/// timing belongs to the caller (the CLI records it in `result.json`).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub mean_strategy_count: f64,
    pub wall_time_ms: u64,
    pub refreshed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best: Chromosome,
    pub best_fitness: f64,
    pub history: Vec<GenerationRecord>,
    /// Generation at which the final best fitness was first reached
    /// (0 = already present in the initial population).
    pub generations_to_best: usize,
}

/// Serializes the per-generation history as CSV.
pub fn write_history_csv(result: &SolveResult) -> String {
    let mut out =
        String::from("generation,best_fitness,mean_fitness,mean_strategy_count,wall_time_ms,refreshed\n");
    for r in &result.history {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.generation,
            r.best_fitness,
            r.mean_fitness,
            r.mean_strategy_count,
            r.wall_time_ms,
            r.refreshed
        ));
    }
    out
}

fn fitness_of(ch: &Chromosome) -> f64 {
    ch.cached_fitness.expect("chromosome must be evaluated")
}

// Stream tags for the per-phase random streams.
const PHASE_INIT: u64 = 0;
const PHASE_CROSS_SELECT: u64 = 1;
const PHASE_CROSSOVER: u64 = 2;
const PHASE_MUT_SELECT: u64 = 3;
const PHASE_MUTATE: u64 = 4;
const PHASE_SELECT: u64 = 5;
const PHASE_REFRESH: u64 = 6;

/// Builds, repairs, and evaluates the initial population of singleton
/// chromosomes. Fully determined by `params.seed`.
pub fn init_population(game: &GameInstance, params: &EvolveParams) -> Vec<Chromosome> {
    (0..params.n_pop)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(params.seed, PHASE_INIT, 0, i as u64);
            let mut ch = Chromosome::random(game, &mut rng);
            if params.local_opt_enabled() {
                for w in &mut ch.strategies {
                    repair(&mut w.strategy, game, &mut rng);
                }
            }
            evaluate(&mut ch, game);
            ch
        })
        .collect()
}

/// Merges two parents. Each pure strategy enters the child with weight
/// `2^u(e) * q`, where `u(e)` is its singleton defender payoff under the
/// owning parent's signaling, min-max normalized to `[-1, 1]` over both
/// parents (all equal -> 0). Signaling tables are averaged element-wise.
/// After normalization each entry is deleted with probability `(1 - q)^2`
/// (kept at least one), unless removal is ablated. The legacy variant
/// instead halves every parent probability and merges duplicates at their
/// mean parent probability.
pub fn crossover(
    a: &Chromosome,
    b: &Chromosome,
    game: &GameInstance,
    params: &EvolveParams,
    rng: &mut impl Rng,
) -> Chromosome {
    let signaling = SignalingTable::mean_of(&a.signaling, &b.signaling);
    let mut entries: Vec<WeightedStrategy> =
        if params.ablation.contains(&AblationSwitch::LegacyCrossover) {
            legacy_union(a, b)
        } else {
            weighted_union(a, b, game)
        };
    normalize(&mut entries);
    if params.is_enabled(AblationSwitch::NoCrossoverRemoval) {
        prune_entries(&mut entries, rng);
        normalize(&mut entries);
    }
    Chromosome {
        strategies: entries,
        signaling,
        cached_fitness: None,
        cached_adv_target: None,
    }
}

fn weighted_union(a: &Chromosome, b: &Chromosome, game: &GameInstance) -> Vec<WeightedStrategy> {
    let utility = |parent: &Chromosome| -> Vec<f64> {
        parent
            .strategies
            .iter()
            .map(|w| pure_strategy_utility(&w.strategy, &parent.signaling, game))
            .collect()
    };
    let utils_a = utility(a);
    let utils_b = utility(b);
    let all = utils_a.iter().chain(&utils_b);
    let u_min = all.clone().fold(f64::INFINITY, |m, &u| m.min(u));
    let u_max = all.fold(f64::NEG_INFINITY, |m, &u| m.max(u));
    let normalized = |u: f64| {
        if u_max > u_min {
            -1.0 + 2.0 * (u - u_min) / (u_max - u_min)
        } else {
            0.0
        }
    };
    a.strategies
        .iter()
        .zip(&utils_a)
        .chain(b.strategies.iter().zip(&utils_b))
        .map(|(w, &u)| WeightedStrategy {
            strategy: w.strategy.clone(),
            prob: 2f64.powf(normalized(u)) * w.prob,
        })
        .collect()
}

fn legacy_union(a: &Chromosome, b: &Chromosome) -> Vec<WeightedStrategy> {
    let mut entries: Vec<WeightedStrategy> = Vec::with_capacity(a.strategies.len() + b.strategies.len());
    for w in a.strategies.iter().chain(&b.strategies) {
        if let Some(existing) = entries.iter_mut().find(|e| e.strategy == w.strategy) {
            // Present in both parents: one listing at the mean parent probability.
            existing.prob = (existing.prob * 2.0 + w.prob) / 2.0;
        } else {
            entries.push(WeightedStrategy {
                strategy: w.strategy.clone(),
                prob: w.prob / 2.0,
            });
        }
    }
    entries
}

fn normalize(entries: &mut [WeightedStrategy]) {
    let total: f64 = entries.iter().map(|w| w.prob).sum();
    for w in entries {
        w.prob /= total;
    }
}

/// Deletes each entry independently with probability `(1 - q)^2`, restoring
/// the highest-probability entry if everything was deleted.
fn prune_entries(entries: &mut Vec<WeightedStrategy>, rng: &mut impl Rng) {
    let kept: Vec<bool> = entries
        .iter()
        .map(|w| {
            let p_delete = (1.0 - w.prob) * (1.0 - w.prob);
            rng.gen::<f64>() >= p_delete
        })
        .collect();
    if kept.iter().any(|&k| k) {
        let mut it = kept.iter();
        entries.retain(|_| *it.next().unwrap());
    } else {
        let best = entries
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.prob.partial_cmp(&y.prob).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let survivor = entries[best].clone();
        entries.clear();
        entries.push(survivor);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    /// Reassigns one pure-strategy probability (M1).
    Probability,
    /// Perturbs one allocation slot (M2 on a pure strategy).
    Allocation,
    /// Complements one signaling entry (M2 on the signaling tables).
    Signaling,
    /// Moves coverage onto the last best-response target (M3).
    Coverage,
}

/// Sets the probability of one uniformly chosen entry to `rho ~ U(0, 1]`
/// and rescales the rest to `1 - rho`. Singletons are returned unchanged.
pub fn mutate_m1(ch: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    if ch.strategies.len() < 2 {
        return ch.clone();
    }
    let idx = rng.gen_range(0..ch.strategies.len());
    let rho = loop {
        let r = rng.gen::<f64>();
        if r > 0.0 {
            break r;
        }
    };
    let mut out = ch.clone();
    m1_apply(&mut out, idx, rho);
    out
}

pub(crate) fn m1_apply(ch: &mut Chromosome, idx: usize, rho: f64) {
    let rest: f64 = ch
        .strategies
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, w)| w.prob)
        .sum();
    let scale = (1.0 - rho) / rest;
    for (i, w) in ch.strategies.iter_mut().enumerate() {
        w.prob = if i == idx { rho } else { w.prob * scale };
    }
    ch.invalidate_cache();
}

/// Replaces one uniformly chosen slot of one list (patrollers, sensors, or
/// reallocation) of one pure strategy, then repairs that strategy.
pub fn mutate_m2_alloc(ch: &Chromosome, game: &GameInstance, rng: &mut impl Rng) -> Chromosome {
    let mut out = ch.clone();
    let touched = m2_alloc_raw(&mut out, game, rng);
    repair(&mut out.strategies[touched].strategy, game, rng);
    out
}

/// The perturbation alone; returns the index of the touched pure strategy.
pub(crate) fn m2_alloc_raw(
    ch: &mut Chromosome,
    game: &GameInstance,
    rng: &mut impl Rng,
) -> usize {
    let idx = rng.gen_range(0..ch.strategies.len());
    let strategy = &mut ch.strategies[idx].strategy;
    let mut lists = vec![ListKind::Patrollers, ListKind::Reallocation];
    if !strategy.sensors.is_empty() {
        lists.insert(1, ListKind::Sensors);
    }
    let list = lists[rng.gen_range(0..lists.len())];
    match list {
        ListKind::Patrollers => {
            let slot = rng.gen_range(0..strategy.patrollers.len());
            strategy.patrollers[slot] = rng.gen_range(0..game.num_vertices());
        }
        ListKind::Sensors => {
            let slot = rng.gen_range(0..strategy.sensors.len());
            strategy.sensors[slot] = rng.gen_range(0..game.num_vertices());
        }
        ListKind::Reallocation => {
            let slot = rng.gen_range(0..strategy.reallocation.len());
            strategy.reallocation[slot] = random_move(game, strategy.patrollers[slot], rng);
        }
    }
    ch.invalidate_cache();
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ListKind {
    Patrollers,
    Sensors,
    Reallocation,
}

/// Complements one uniformly chosen signaling entry.
pub fn mutate_m2_signal(ch: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    let mut out = ch.clone();
    let idx = rng.gen_range(0..out.signaling.num_entries());
    let entry = out.signaling.entry_mut(idx);
    *entry = 1.0 - *entry;
    out.invalidate_cache();
    out
}

/// Moves coverage onto the cached best-response target: one uniformly chosen
/// pure strategy not covering it gets the target written into a uniformly
/// chosen patroller or sensor slot, then is repaired. If every strategy
/// already covers the target (or no target is cached), the chromosome is
/// returned unchanged.
pub fn mutate_m3(ch: &Chromosome, game: &GameInstance, rng: &mut impl Rng) -> Chromosome {
    let mut out = ch.clone();
    if let Some(touched) = m3_raw(&mut out, rng) {
        repair(&mut out.strategies[touched].strategy, game, rng);
    }
    out
}

pub(crate) fn m3_raw(ch: &mut Chromosome, rng: &mut impl Rng) -> Option<usize> {
    let target = ch.cached_adv_target?;
    let candidates: Vec<usize> = ch
        .strategies
        .iter()
        .enumerate()
        .filter(|(_, w)| {
            !w.strategy.patrollers.contains(&target) && !w.strategy.sensors.contains(&target)
        })
        .map(|(i, _)| i)
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let idx = candidates[rng.gen_range(0..candidates.len())];
    let strategy = &mut ch.strategies[idx].strategy;
    let k = strategy.patrollers.len();
    let slot = rng.gen_range(0..k + strategy.sensors.len());
    if slot < k {
        strategy.patrollers[slot] = target;
    } else {
        strategy.sensors[slot - k] = target;
    }
    ch.invalidate_cache();
    Some(idx)
}

/// Result of the retried mutation operator.
#[derive(Debug, Clone)]
pub struct MutationOutcome {
    pub chromosome: Chromosome,
    /// Attempts actually spent (0 when every mutation type is disabled).
    pub attempts: usize,
    pub improved: bool,
}

/// Applies up to `m_limit` mutation attempts, each picking one enabled
/// mutation type uniformly and starting from the original chromosome.
/// Returns the first strictly better-fitted result; after the last failed
/// attempt, that attempt's result is kept even if worse.
pub fn mutate(
    ch: &Chromosome,
    game: &GameInstance,
    params: &EvolveParams,
    rng: &mut impl Rng,
) -> MutationOutcome {
    let kinds = params.enabled_mutations();
    if kinds.is_empty() {
        return MutationOutcome {
            chromosome: ch.clone(),
            attempts: 0,
            improved: false,
        };
    }
    let base = ch
        .cached_fitness
        .unwrap_or_else(|| best_response(ch, game).defender_payoff);
    let repair_enabled = params.local_opt_enabled();
    let mut last = None;
    for attempt in 1..=params.m_limit {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let mut candidate = apply_mutation(kind, ch, game, repair_enabled, rng);
        let fitness = evaluate(&mut candidate, game);
        if fitness > base + FITNESS_TOLERANCE {
            return MutationOutcome {
                chromosome: candidate,
                attempts: attempt,
                improved: true,
            };
        }
        last = Some(candidate);
    }
    MutationOutcome {
        chromosome: last.expect("m_limit >= 1"),
        attempts: params.m_limit,
        improved: false,
    }
}

fn apply_mutation(
    kind: MutationKind,
    ch: &Chromosome,
    game: &GameInstance,
    repair_enabled: bool,
    rng: &mut impl Rng,
) -> Chromosome {
    match kind {
        MutationKind::Probability => mutate_m1(ch, rng),
        MutationKind::Signaling => mutate_m2_signal(ch, rng),
        MutationKind::Allocation => {
            let mut out = ch.clone();
            let touched = m2_alloc_raw(&mut out, game, rng);
            if repair_enabled {
                repair(&mut out.strategies[touched].strategy, game, rng);
            }
            out
        }
        MutationKind::Coverage => {
            let mut out = ch.clone();
            if let Some(touched) = m3_raw(&mut out, rng) {
                if repair_enabled {
                    repair(&mut out.strategies[touched].strategy, game, rng);
                }
            }
            out
        }
    }
}

/// Elitist binary-tournament selection over the full pool. The `n_e` best
/// members (ties by pool order) are promoted unconditionally; the remaining
/// slots are filled by tournaments between two distinct uniformly drawn pool
/// members, promoting the better with probability `p_sp`.
pub fn select(
    pool: &[Chromosome],
    params: &EvolveParams,
    rng: &mut impl Rng,
) -> Vec<Chromosome> {
    assert!(
        pool.len() >= params.n_pop,
        "selection pool smaller than n_pop"
    );
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| fitness_of(&pool[j]).partial_cmp(&fitness_of(&pool[i])).unwrap());
    let mut next: Vec<Chromosome> = order[..params.n_e]
        .iter()
        .map(|&i| pool[i].clone())
        .collect();
    while next.len() < params.n_pop {
        let i = rng.gen_range(0..pool.len());
        let j = loop {
            let j = rng.gen_range(0..pool.len());
            if j != i {
                break j;
            }
        };
        let (better, worse) = if fitness_of(&pool[i]) >= fitness_of(&pool[j]) {
            (i, j)
        } else {
            (j, i)
        };
        let chosen = if rng.gen::<f64>() < params.p_sp {
            better
        } else {
            worse
        };
        next.push(pool[chosen].clone());
    }
    next
}

/// Replaces `n_pop / 2` uniformly chosen members (never the current best)
/// with fresh evaluated singleton chromosomes.
pub fn refresh(
    population: &mut [Chromosome],
    game: &GameInstance,
    params: &EvolveParams,
    rng: &mut impl Rng,
) {
    let best_idx = population
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| fitness_of(x).partial_cmp(&fitness_of(y)).unwrap())
        .map(|(i, _)| i)
        .expect("non-empty population");
    let mut candidates: Vec<usize> = (0..population.len()).filter(|&i| i != best_idx).collect();
    let count = population.len() / 2;
    for i in 0..count {
        let j = rng.gen_range(i..candidates.len());
        candidates.swap(i, j);
    }
    for &idx in &candidates[..count] {
        let mut fresh = Chromosome::random(game, rng);
        if params.local_opt_enabled() {
            for w in &mut fresh.strategies {
                repair(&mut w.strategy, game, rng);
            }
        }
        evaluate(&mut fresh, game);
        population[idx] = fresh;
    }
}

/// Runs the full solver loop.
pub fn run(game: &GameInstance, params: &EvolveParams) -> Result<SolveResult> {
    run_with_observer(game, params, |_, _| {})
}

/// [`run`] with a per-generation hook called on the post-selection
/// population (and once on the initial population with generation 0).
pub fn run_with_observer(
    game: &GameInstance,
    params: &EvolveParams,
    mut observer: impl FnMut(usize, &[Chromosome]),
) -> Result<SolveResult> {
    params.validate()?;
    let seed = params.seed;
    let mut population = init_population(game, params);
    observer(0, &population);

    let best_init = population
        .iter()
        .max_by(|x, y| fitness_of(x).partial_cmp(&fitness_of(y)).unwrap())
        .unwrap();
    let mut best = best_init.clone();
    let mut best_fitness = fitness_of(&best);
    let mut generations_to_best = 0usize;
    let mut stagnation = 0usize;
    let mut history = Vec::with_capacity(params.n_gen);

    let do_crossover = params.is_enabled(AblationSwitch::NoCrossover) && params.p_c > 0.0;
    let do_mutation = params.is_enabled(AblationSwitch::NoMutation)
        && params.p_m > 0.0
        && !params.enabled_mutations().is_empty();
    let do_refresh = params.is_enabled(AblationSwitch::NoRefresh);

    for gen in 1..=params.n_gen {
        let gen_tag = gen as u64;
        let mut offspring: Vec<Chromosome> = Vec::new();

        if do_crossover {
            let mut sel_rng = derive_rng(seed, PHASE_CROSS_SELECT, gen_tag, 0);
            let mut selected: Vec<usize> = (0..population.len())
                .filter(|_| sel_rng.gen::<f64>() < params.p_c)
                .collect();
            selected.shuffle(&mut sel_rng);
            if selected.len() % 2 == 1 {
                selected.pop();
            }
            let pairs: Vec<(usize, usize)> = selected
                .chunks_exact(2)
                .map(|pair| (pair[0], pair[1]))
                .collect();
            let children: Vec<Chromosome> = pairs
                .par_iter()
                .enumerate()
                .map(|(pair_idx, &(ia, ib))| {
                    let mut rng = derive_rng(seed, PHASE_CROSSOVER, gen_tag, pair_idx as u64);
                    let mut child =
                        crossover(&population[ia], &population[ib], game, params, &mut rng);
                    if params.local_opt_enabled() {
                        for w in &mut child.strategies {
                            repair(&mut w.strategy, game, &mut rng);
                        }
                    }
                    evaluate(&mut child, game);
                    child
                })
                .collect();
            offspring.extend(children);
        }

        if do_mutation {
            let mut sel_rng = derive_rng(seed, PHASE_MUT_SELECT, gen_tag, 0);
            let chosen: Vec<usize> = (0..population.len())
                .filter(|_| sel_rng.gen::<f64>() < params.p_m)
                .collect();
            let mutants: Vec<Chromosome> = chosen
                .par_iter()
                .map(|&i| {
                    let mut rng = derive_rng(seed, PHASE_MUTATE, gen_tag, i as u64);
                    mutate(&population[i], game, params, &mut rng).chromosome
                })
                .collect();
            offspring.extend(mutants);
        }

        let mut pool = std::mem::take(&mut population);
        pool.extend(offspring);

        let pool_best = pool
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| fitness_of(x).partial_cmp(&fitness_of(y)).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if fitness_of(&pool[pool_best]) > best_fitness + FITNESS_TOLERANCE {
            best = pool[pool_best].clone();
            best_fitness = fitness_of(&best);
            generations_to_best = gen;
            stagnation = 0;
        } else {
            stagnation += 1;
        }

        let mut sel_rng = derive_rng(seed, PHASE_SELECT, gen_tag, 0);
        population = select(&pool, params, &mut sel_rng);

        let mut refreshed = false;
        if do_refresh && stagnation >= params.n_ref {
            let mut r = derive_rng(seed, PHASE_REFRESH, gen_tag, 0);
            refresh(&mut population, game, params, &mut r);
            stagnation = 0;
            refreshed = true;
        }

        let mean_fitness =
            population.iter().map(fitness_of).sum::<f64>() / population.len() as f64;
        let mean_strategy_count = population
            .iter()
            .map(|c| c.strategy_count() as f64)
            .sum::<f64>()
            / population.len() as f64;
        history.push(GenerationRecord {
            generation: gen,
            best_fitness,
            mean_fitness,
            mean_strategy_count,
            wall_time_ms: 0,
            refreshed,
        });
        observer(gen, &population);
    }

    Ok(SolveResult {
        best,
        best_fitness,
        history,
        generations_to_best,
    })
}
