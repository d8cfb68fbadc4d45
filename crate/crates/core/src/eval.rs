//! Exact expected payoffs and the adversary best response.
//!
//! The adversary commits to a target vertex and a reaction scheme mapping
//! each observable state `{n, s0, s1}` to attack or flee. For a fixed target
//! the payoff expectation factors through the joint distribution of the
//! observed state and the would-be outcome of an attack, so one pass over
//! the chromosome's pure strategies yields an [`AttackProfile`] from which
//! all eight reaction schemes are scored. Fleeing always ends the game at
//! `(0, 0)` for both players.

use serde::{Deserialize, Serialize};

use crate::game::{GameInstance, SignalState};
use crate::strategy::{
    allocation_state, reallocated_to, AllocationState, Chromosome, SensorState, SignalingTable,
    WeightedStrategy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReactionChoice {
    Attack,
    Flee,
}

/// Reaction scheme: one choice per observable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Reaction {
    /// Choice on observing no sensor (`n`).
    pub on_no_sensor: ReactionChoice,
    /// Choice on observing the weak signal (`s0`).
    pub on_weak: ReactionChoice,
    /// Choice on observing the strong signal (`s1`).
    pub on_strong: ReactionChoice,
}

impl Reaction {
    pub fn choice(&self, observed: SignalState) -> ReactionChoice {
        match observed {
            SignalState::NoSensor => self.on_no_sensor,
            SignalState::Weak => self.on_weak,
            SignalState::Strong => self.on_strong,
        }
    }

    pub const ALWAYS_ATTACK: Reaction = Reaction {
        on_no_sensor: ReactionChoice::Attack,
        on_weak: ReactionChoice::Attack,
        on_strong: ReactionChoice::Attack,
    };

    pub const ALWAYS_FLEE: Reaction = Reaction {
        on_no_sensor: ReactionChoice::Flee,
        on_weak: ReactionChoice::Flee,
        on_strong: ReactionChoice::Flee,
    };

    /// All eight schemes in lexicographic order over `(n, s0, s1)` with
    /// attack ordered before flee. Best-response ties resolve to the first
    /// scheme in this order.
    pub fn all() -> [Reaction; 8] {
        let choices = [ReactionChoice::Attack, ReactionChoice::Flee];
        let mut out = [Reaction::ALWAYS_ATTACK; 8];
        let mut i = 0;
        for n in choices {
            for s0 in choices {
                for s1 in choices {
                    out[i] = Reaction {
                        on_no_sensor: n,
                        on_weak: s0,
                        on_strong: s1,
                    };
                    i += 1;
                }
            }
        }
        out
    }
}

/// An adversary pure strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdversaryStrategy {
    pub target: usize,
    pub reaction: Reaction,
}

/// Result of evaluating a chromosome: the defender's expected payoff (the
/// fitness), the adversary's expected payoff, and the maximizing adversary
/// strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub defender_payoff: f64,
    pub adversary_payoff: f64,
    pub best_response: AdversaryStrategy,
}

#[derive(Serialize, Deserialize)]
struct ReactionWire {
    n: ReactionChoice,
    s0: ReactionChoice,
    s1: ReactionChoice,
}

#[derive(Serialize, Deserialize)]
struct EvalReportWire {
    defender_payoff: f64,
    adversary_payoff: f64,
    target: usize,
    reaction: ReactionWire,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let wire = EvalReportWire {
            defender_payoff: self.defender_payoff,
            adversary_payoff: self.adversary_payoff,
            target: self.best_response.target,
            reaction: ReactionWire {
                n: self.best_response.reaction.on_no_sensor,
                s0: self.best_response.reaction.on_weak,
                s1: self.best_response.reaction.on_strong,
            },
        };
        serde_json::to_string(&wire).expect("report encoding")
    }
}

/// Marginal allocation probabilities per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTable {
    /// Probability that a patroller is allocated at the vertex.
    pub p_pat: Vec<f64>,
    /// Sensor-state marginals, indexed `[vertex][SensorState]`.
    pub x: Vec<[f64; 3]>,
    /// Probability that the vertex is uncovered yet receives a legal
    /// reallocation in the reaction stage.
    pub p_realloc: Vec<f64>,
}

/// Accumulates per-vertex marginals by enumerating the strategy list.
pub fn marginals(ch: &Chromosome, game: &GameInstance) -> MarginalTable {
    let n = game.num_vertices();
    let mut table = MarginalTable {
        p_pat: vec![0.0; n],
        x: vec![[0.0; 3]; n],
        p_realloc: vec![0.0; n],
    };
    for w in &ch.strategies {
        let e = &w.strategy;
        let mut counted: Vec<usize> = Vec::new();
        for v in e
            .patrollers
            .iter()
            .chain(&e.sensors)
            .chain(&e.reallocation)
        {
            if !counted.contains(v) {
                counted.push(*v);
            }
        }
        for &v in &counted {
            match allocation_state(e, game, v) {
                AllocationState::Patroller => table.p_pat[v] += w.prob,
                AllocationState::Sensor(state) => table.x[v][state.index()] += w.prob,
                AllocationState::Uncovered => {
                    if reallocated_to(e, game, v) {
                        table.p_realloc[v] += w.prob;
                    }
                }
            }
        }
    }
    table
}

/// Probability that the sensor mass at `v` emits the weak (`s0`) and strong
/// (`s1`) signal respectively: `p0 = gamma·Σ x·phi + (1−gamma)·Σ x·psi` and
/// `p1` its complement within the total sensor mass at `v`.
pub fn signal_probabilities(ch: &Chromosome, game: &GameInstance, v: usize) -> (f64, f64) {
    let table = marginals(ch, game);
    signal_probabilities_with(&table, &ch.signaling, game.gamma(), v)
}

pub fn signal_probabilities_with(
    table: &MarginalTable,
    signaling: &SignalingTable,
    gamma: f64,
    v: usize,
) -> (f64, f64) {
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    for state in SensorState::ALL {
        let x = table.x[v][state.index()];
        let psi = signaling.psi(state, v);
        let phi = signaling.phi(state, v);
        p0 += gamma * x * phi + (1.0 - gamma) * x * psi;
        p1 += gamma * x * (1.0 - phi) + (1.0 - gamma) * x * (1.0 - psi);
    }
    (p0, p1)
}

/// Joint weights of (observed state, would-be attack outcome) for a fixed
/// target: `w_caught[o] + w_success[o]` is the probability the adversary
/// observes state `o`, split by whether an attack would be interdicted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackProfile {
    pub w_caught: [f64; 3],
    pub w_success: [f64; 3],
}

impl AttackProfile {
    /// Scores one reaction scheme against the profile.
    pub fn score(&self, game: &GameInstance, target: usize, reaction: Reaction) -> (f64, f64) {
        let u = game.utilities(target);
        let mut defender = 0.0;
        let mut adversary = 0.0;
        for observed in SignalState::ALL {
            if reaction.choice(observed) == ReactionChoice::Attack {
                let i = observed.index();
                defender += self.w_caught[i] * u.def_caught + self.w_success[i] * u.def_attacked;
                adversary += self.w_caught[i] * u.adv_caught + self.w_success[i] * u.adv_success;
            }
        }
        (defender, adversary)
    }
}

/// Builds the attack profile for `target` by walking the pure strategies.
pub fn attack_profile(
    strategies: &[WeightedStrategy],
    signaling: &SignalingTable,
    game: &GameInstance,
    target: usize,
) -> AttackProfile {
    let pi = game.pi();
    let gamma = game.gamma();
    let mut profile = AttackProfile {
        w_caught: [0.0; 3],
        w_success: [0.0; 3],
    };
    let add = |dst: &mut [f64; 3], weight: f64, true_state: SignalState| {
        for observed in SignalState::ALL {
            dst[observed.index()] += weight * pi.observe_prob(observed, true_state);
        }
    };
    for w in strategies {
        let e = &w.strategy;
        match allocation_state(e, game, target) {
            AllocationState::Patroller => {
                add(&mut profile.w_caught, w.prob, SignalState::NoSensor);
            }
            AllocationState::Uncovered => {
                // Caught only if some patroller's reaction-stage move lands
                // on the target.
                let dst = if reallocated_to(e, game, target) {
                    &mut profile.w_caught
                } else {
                    &mut profile.w_success
                };
                add(dst, w.prob, SignalState::NoSensor);
            }
            AllocationState::Sensor(state) => {
                let psi = signaling.psi(state, target);
                let phi = signaling.phi(state, target);
                // Detection: any patroller in the neighborhood responds.
                let w_detect = w.prob * (1.0 - gamma);
                let caught_on_detect = state != SensorState::Unprotected;
                {
                    let dst = if caught_on_detect {
                        &mut profile.w_caught
                    } else {
                        &mut profile.w_success
                    };
                    add(dst, w_detect * psi, SignalState::Weak);
                    add(dst, w_detect * (1.0 - psi), SignalState::Strong);
                }
                // Missed detection: only a scheduled reaction-stage visit
                // still interdicts.
                let w_miss = w.prob * gamma;
                let caught_on_miss = state == SensorState::Visited;
                {
                    let dst = if caught_on_miss {
                        &mut profile.w_caught
                    } else {
                        &mut profile.w_success
                    };
                    add(dst, w_miss * phi, SignalState::Weak);
                    add(dst, w_miss * (1.0 - phi), SignalState::Strong);
                }
            }
        }
    }
    profile
}

/// Expected `(defender, adversary)` payoff pair against one adversary
/// strategy.
pub fn payoff_against(
    ch: &Chromosome,
    game: &GameInstance,
    adversary: &AdversaryStrategy,
) -> (f64, f64) {
    let profile = attack_profile(&ch.strategies, &ch.signaling, game, adversary.target);
    profile.score(game, adversary.target, adversary.reaction)
}

/// Exhaustive best response over all `num_vertices × 8` adversary
/// strategies. Ties on the adversary payoff break in the defender's favor;
/// remaining ties resolve to the lowest target id, then to the first scheme
/// in [`Reaction::all`] order.
pub fn best_response(ch: &Chromosome, game: &GameInstance) -> EvalReport {
    best_response_over(&ch.strategies, &ch.signaling, game)
}

pub(crate) fn best_response_over(
    strategies: &[WeightedStrategy],
    signaling: &SignalingTable,
    game: &GameInstance,
) -> EvalReport {
    let mut best: Option<EvalReport> = None;
    for target in 0..game.num_vertices() {
        let profile = attack_profile(strategies, signaling, game, target);
        for reaction in Reaction::all() {
            let (defender, adversary) = profile.score(game, target, reaction);
            let better = match &best {
                None => true,
                Some(b) => {
                    adversary > b.adversary_payoff
                        || (adversary == b.adversary_payoff && defender > b.defender_payoff)
                }
            };
            if better {
                best = Some(EvalReport {
                    defender_payoff: defender,
                    adversary_payoff: adversary,
                    best_response: AdversaryStrategy { target, reaction },
                });
            }
        }
    }
    best.expect("at least one vertex")
}

/// Defender payoff of a single pure strategy played with probability 1
/// under the given signaling table.
pub fn pure_strategy_utility(
    strategy: &crate::strategy::PureStrategy,
    signaling: &SignalingTable,
    game: &GameInstance,
) -> f64 {
    let single = [WeightedStrategy {
        strategy: strategy.clone(),
        prob: 1.0,
    }];
    best_response_over(&single, signaling, game).defender_payoff
}

/// Evaluates the chromosome, caching the fitness and the best-response
/// target. Returns the cached fitness when present.
pub fn evaluate(ch: &mut Chromosome, game: &GameInstance) -> f64 {
    if let Some(fitness) = ch.cached_fitness {
        return fitness;
    }
    let report = best_response(ch, game);
    ch.cached_fitness = Some(report.defender_payoff);
    ch.cached_adv_target = Some(report.best_response.target);
    report.defender_payoff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Graph, UncertaintyMatrix, VertexUtilities};
    use crate::rng::derive_rng;
    use crate::strategy::{random_mixed_chromosome, PureStrategy};

    fn unit_utils(n: usize) -> Vec<VertexUtilities> {
        vec![
            VertexUtilities {
                def_caught: 1.0,
                def_attacked: -1.0,
                adv_success: 1.0,
                adv_caught: -1.0,
            };
            n
        ]
    }

    /// Two vertices joined by an edge, one patroller, one sensor, perfect
    /// detection and observation, unit utilities.
    fn k2_game() -> GameInstance {
        GameInstance::new(
            "k2",
            Graph::new(2, &[(0, 1)]).unwrap(),
            1,
            1,
            0.0,
            UncertaintyMatrix::identity(),
            unit_utils(2),
        )
        .unwrap()
    }

    /// Patroller at 0 visiting the sensor at 1; on detection always signal
    /// strong, on a miss always signal weak.
    fn k2_chromosome() -> Chromosome {
        let strategy = PureStrategy {
            patrollers: vec![0],
            sensors: vec![1],
            reallocation: vec![1],
        };
        Chromosome {
            strategies: vec![WeightedStrategy {
                strategy,
                prob: 1.0,
            }],
            signaling: SignalingTable {
                psi: [vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]],
                phi: [vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]],
            },
            cached_fitness: None,
            cached_adv_target: None,
        }
    }

    #[test]
    fn marginals_of_a_single_strategy() {
        let game = k2_game();
        let ch = k2_chromosome();
        let table = marginals(&ch, &game);
        assert_eq!(table.p_pat, vec![1.0, 0.0]);
        assert_eq!(table.x[1][SensorState::Visited.index()], 1.0);
        assert_eq!(table.x[0], [0.0; 3]);
        assert_eq!(table.p_realloc, vec![0.0, 0.0]);
    }

    #[test]
    fn marginals_are_linear_in_probabilities() {
        let game = GameInstance::new(
            "p3",
            Graph::new(3, &[(0, 1), (1, 2)]).unwrap(),
            1,
            1,
            0.0,
            UncertaintyMatrix::identity(),
            unit_utils(3),
        )
        .unwrap();
        let visited = PureStrategy {
            patrollers: vec![0],
            sensors: vec![1],
            reallocation: vec![1],
        };
        let alone = PureStrategy {
            patrollers: vec![0],
            sensors: vec![2],
            reallocation: vec![0],
        };
        let ch = Chromosome {
            strategies: vec![
                WeightedStrategy {
                    strategy: visited,
                    prob: 0.5,
                },
                WeightedStrategy {
                    strategy: alone,
                    prob: 0.5,
                },
            ],
            signaling: SignalingTable::random(3, &mut derive_rng(0, 0, 0, 0)),
            cached_fitness: None,
            cached_adv_target: None,
        };
        let table = marginals(&ch, &game);
        assert_eq!(table.x[1][SensorState::Visited.index()], 0.5);
        assert_eq!(table.x[2][SensorState::Unprotected.index()], 0.5);
        assert_eq!(table.p_pat[0], 1.0);
    }

    #[test]
    fn marginals_match_direct_recount() {
        let mut rng = derive_rng(42, 0, 0, 0);
        let game = GameInstance::new(
            "g5",
            Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap(),
            2,
            2,
            0.3,
            UncertaintyMatrix::from_kappa(0.4).unwrap(),
            unit_utils(5),
        )
        .unwrap();
        for _ in 0..50 {
            let ch = random_mixed_chromosome(&game, 4, &mut rng);
            let table = marginals(&ch, &game);
            for v in 0..5 {
                let mut p_pat = 0.0;
                let mut x = [0.0; 3];
                let mut p_realloc = 0.0;
                for w in &ch.strategies {
                    match allocation_state(&w.strategy, &game, v) {
                        AllocationState::Patroller => p_pat += w.prob,
                        AllocationState::Sensor(s) => x[s.index()] += w.prob,
                        AllocationState::Uncovered => {
                            if w.strategy.reallocation.contains(&v) {
                                p_realloc += w.prob;
                            }
                        }
                    }
                }
                assert!((table.p_pat[v] - p_pat).abs() < 1e-12);
                assert!((table.p_realloc[v] - p_realloc).abs() < 1e-12);
                for s in 0..3 {
                    assert!((table.x[v][s] - x[s]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn signal_probability_examples() {
        // gamma = 0, all sensor mass visited, psi = 0.3.
        let game = k2_game();
        let mut ch = k2_chromosome();
        ch.signaling.psi[SensorState::Visited.index()][1] = 0.3;
        let (p0, p1) = signal_probabilities(&ch, &game, 1);
        assert!((p0 - 0.3).abs() < 1e-12);
        assert!((p1 - 0.7).abs() < 1e-12);

        // No sensor mass at the patroller vertex.
        let (p0, p1) = signal_probabilities(&ch, &game, 0);
        assert_eq!((p0, p1), (0.0, 0.0));
    }

    #[test]
    fn signal_probability_with_detection_uncertainty() {
        // gamma = 0.5, all mass unprotected, psi = 0.2, phi = 0.8.
        let game = GameInstance::new(
            "p3",
            Graph::new(3, &[(0, 1)]).unwrap(),
            1,
            1,
            0.5,
            UncertaintyMatrix::identity(),
            unit_utils(3),
        )
        .unwrap();
        let strategy = PureStrategy {
            patrollers: vec![0],
            sensors: vec![2],
            reallocation: vec![0],
        };
        let mut ch = Chromosome {
            strategies: vec![WeightedStrategy {
                strategy,
                prob: 1.0,
            }],
            signaling: SignalingTable {
                psi: [vec![0.2; 3], vec![0.2; 3], vec![0.2; 3]],
                phi: [vec![0.8; 3], vec![0.8; 3], vec![0.8; 3]],
            },
            cached_fitness: None,
            cached_adv_target: None,
        };
        ch.invalidate_cache();
        let (p0, p1) = signal_probabilities(&ch, &game, 2);
        assert!((p0 - 0.5).abs() < 1e-12);
        assert!((p1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn k2_payoffs_by_hand() {
        let game = k2_game();
        let ch = k2_chromosome();

        // Detection is certain, psi = 0 sends the strong signal, identity
        // observation: flee-on-strong always interrupts the attack.
        let flee_on_strong = AdversaryStrategy {
            target: 1,
            reaction: Reaction {
                on_no_sensor: ReactionChoice::Attack,
                on_weak: ReactionChoice::Attack,
                on_strong: ReactionChoice::Flee,
            },
        };
        assert_eq!(payoff_against(&ch, &game, &flee_on_strong), (0.0, 0.0));

        let always_attack_sensor = AdversaryStrategy {
            target: 1,
            reaction: Reaction::ALWAYS_ATTACK,
        };
        assert_eq!(payoff_against(&ch, &game, &always_attack_sensor), (1.0, -1.0));

        let always_attack_patroller = AdversaryStrategy {
            target: 0,
            reaction: Reaction::ALWAYS_ATTACK,
        };
        assert_eq!(
            payoff_against(&ch, &game, &always_attack_patroller),
            (1.0, -1.0)
        );
    }

    #[test]
    fn k2_best_response_is_flee_with_zero_payoffs() {
        let game = k2_game();
        let ch = k2_chromosome();
        let report = best_response(&ch, &game);
        assert_eq!(report.adversary_payoff, 0.0);
        assert_eq!(report.defender_payoff, 0.0);
        // Exhaustive recount.
        let mut max_adv = f64::NEG_INFINITY;
        for target in 0..2 {
            for reaction in Reaction::all() {
                let (_, adv) = payoff_against(&ch, &game, &AdversaryStrategy { target, reaction });
                max_adv = max_adv.max(adv);
            }
        }
        assert_eq!(report.adversary_payoff, max_adv);
    }

    #[test]
    fn best_response_tie_breaks_toward_defender_then_lowest_target() {
        // Vertex 1 pays the adversary as much as vertex 2 but hurts the
        // defender less; both are uncovered and unreachable.
        let game = GameInstance::new(
            "ties",
            Graph::new(3, &[]).unwrap(),
            1,
            0,
            0.0,
            UncertaintyMatrix::identity(),
            vec![
                VertexUtilities {
                    def_caught: 1.0,
                    def_attacked: -5.0,
                    adv_success: 9.0,
                    adv_caught: -1.0,
                },
                VertexUtilities {
                    def_caught: 1.0,
                    def_attacked: -2.0,
                    adv_success: 10.0,
                    adv_caught: -1.0,
                },
                VertexUtilities {
                    def_caught: 1.0,
                    def_attacked: -7.0,
                    adv_success: 10.0,
                    adv_caught: -1.0,
                },
            ],
        )
        .unwrap();
        let ch = Chromosome {
            strategies: vec![WeightedStrategy {
                strategy: PureStrategy {
                    patrollers: vec![0],
                    sensors: vec![],
                    reallocation: vec![0],
                },
                prob: 1.0,
            }],
            signaling: SignalingTable {
                psi: [vec![0.5; 3], vec![0.5; 3], vec![0.5; 3]],
                phi: [vec![0.5; 3], vec![0.5; 3], vec![0.5; 3]],
            },
            cached_fitness: None,
            cached_adv_target: None,
        };
        let report = best_response(&ch, &game);
        assert_eq!(report.adversary_payoff, 10.0);
        // Strong Stackelberg: prefer the defender-friendlier vertex 1.
        assert_eq!(report.best_response.target, 1);
        assert_eq!(report.defender_payoff, -2.0);
    }

    #[test]
    fn flee_floor_and_brute_force_optimality() {
        let mut rng = derive_rng(7, 1, 0, 0);
        let game = GameInstance::new(
            "g6",
            Graph::new(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap(),
            2,
            2,
            0.35,
            UncertaintyMatrix::from_kappa(0.6).unwrap(),
            vec![
                VertexUtilities {
                    def_caught: 2.0,
                    def_attacked: -8.0,
                    adv_success: 5.0,
                    adv_caught: -3.0,
                };
                6
            ],
        )
        .unwrap();
        for _ in 0..100 {
            let ch = random_mixed_chromosome(&game, 5, &mut rng);
            let report = best_response(&ch, &game);
            assert!(report.adversary_payoff >= 0.0);
            for target in 0..6 {
                for reaction in Reaction::all() {
                    let (_, adv) =
                        payoff_against(&ch, &game, &AdversaryStrategy { target, reaction });
                    assert!(adv <= report.adversary_payoff);
                }
            }
        }
    }

    #[test]
    fn fitness_invariant_under_permutation_and_split() {
        let mut rng = derive_rng(11, 2, 0, 0);
        let game = GameInstance::new(
            "g5",
            Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap(),
            1,
            2,
            0.25,
            UncertaintyMatrix::from_kappa(0.3).unwrap(),
            unit_utils(5),
        )
        .unwrap();
        for _ in 0..30 {
            let ch = random_mixed_chromosome(&game, 4, &mut rng);
            let base = best_response(&ch, &game).defender_payoff;

            let mut permuted = ch.clone();
            permuted.strategies.reverse();
            let perm = best_response(&permuted, &game).defender_payoff;
            assert!((base - perm).abs() < 1e-9);

            let mut split = ch.clone();
            let first = split.strategies[0].clone();
            split.strategies[0].prob = first.prob / 2.0;
            split.strategies.push(WeightedStrategy {
                strategy: first.strategy.clone(),
                prob: first.prob / 2.0,
            });
            let sp = best_response(&split, &game).defender_payoff;
            assert!((base - sp).abs() < 1e-9);
        }
    }

    #[test]
    fn marginal_mass_sums_to_resource_counts() {
        let mut rng = derive_rng(13, 3, 0, 0);
        let game = GameInstance::new(
            "g7",
            Graph::new(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]).unwrap(),
            2,
            3,
            0.5,
            UncertaintyMatrix::from_kappa(0.5).unwrap(),
            unit_utils(7),
        )
        .unwrap();
        for _ in 0..50 {
            let ch = random_mixed_chromosome(&game, 5, &mut rng);
            let table = marginals(&ch, &game);
            let pat_total: f64 = table.p_pat.iter().sum();
            let sensor_total: f64 = table.x.iter().map(|x| x.iter().sum::<f64>()).sum();
            assert!((pat_total - 2.0).abs() < 1e-9);
            assert!((sensor_total - 3.0).abs() < 1e-9);
            // Signal probabilities sum to the sensor mass at each vertex.
            for v in 0..7 {
                let (p0, p1) = signal_probabilities_with(&table, &ch.signaling, game.gamma(), v);
                let mass: f64 = table.x[v].iter().sum();
                assert!((p0 + p1 - mass).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pure_strategy_utility_matches_singleton_evaluation() {
        let mut rng = derive_rng(17, 4, 0, 0);
        let game = k2_game();
        for _ in 0..20 {
            let ch = random_mixed_chromosome(&game, 1, &mut rng);
            let direct = pure_strategy_utility(&ch.strategies[0].strategy, &ch.signaling, &game);
            let via_report = best_response(&ch, &game).defender_payoff;
            assert_eq!(direct, via_report);
        }
        // The hand-built strategy from the payoff examples scores 0.
        let ch = k2_chromosome();
        assert_eq!(
            pure_strategy_utility(&ch.strategies[0].strategy, &ch.signaling, &game),
            0.0
        );
    }

    #[test]
    fn evaluate_caches_fitness_and_target() {
        let game = k2_game();
        let mut ch = k2_chromosome();
        let fitness = evaluate(&mut ch, &game);
        assert_eq!(fitness, 0.0);
        assert_eq!(ch.cached_fitness, Some(0.0));
        assert!(ch.cached_adv_target.is_some());
        assert_eq!(evaluate(&mut ch, &game), fitness);
    }

    #[test]
    fn sensor_state_outcome_table() {
        // Attack outcomes at a sensor vertex, per state and detection:
        // detected -> caught unless the sensor is unprotected;
        // missed   -> caught only with a scheduled reaction-stage visit.
        let gamma = 0.25;
        let game = GameInstance::new(
            "p4",
            Graph::new(4, &[(0, 1), (2, 3)]).unwrap(),
            1,
            1,
            gamma,
            UncertaintyMatrix::identity(),
            unit_utils(4),
        )
        .unwrap();
        let signaling = SignalingTable {
            // psi = 1: always signal weak on detection; phi = 0: always
            // signal strong on a miss, so the observed signal reveals the
            // detection outcome exactly.
            psi: [vec![1.0; 4], vec![1.0; 4], vec![1.0; 4]],
            phi: [vec![0.0; 4], vec![0.0; 4], vec![0.0; 4]],
        };
        let cases = [
            // (patroller, realloc, sensor, expected caught-prob under
            //  always-attack at the sensor vertex)
            (0, 1, 1, 1.0),                 // visited: caught either way
            (0, 0, 1, 1.0 - gamma),         // adjacent: caught on detection
            (0, 0, 2, 0.0),                 // unprotected: never caught
        ];
        for (p, r, s, caught) in cases {
            let ch = Chromosome {
                strategies: vec![WeightedStrategy {
                    strategy: PureStrategy {
                        patrollers: vec![p],
                        sensors: vec![s],
                        reallocation: vec![r],
                    },
                    prob: 1.0,
                }],
                signaling: signaling.clone(),
                cached_fitness: None,
                cached_adv_target: None,
            };
            let (def, adv) = payoff_against(
                &ch,
                &game,
                &AdversaryStrategy {
                    target: s,
                    reaction: Reaction::ALWAYS_ATTACK,
                },
            );
            let expected_def = caught * 1.0 + (1.0 - caught) * -1.0;
            assert!((def - expected_def).abs() < 1e-12, "state case ({p},{r},{s})");
            assert!((adv + expected_def).abs() < 1e-12);

            // Fleeing exactly on the detection-revealing signal leaves only
            // the missed-detection branch payoffs.
            let flee_on_weak = Reaction {
                on_no_sensor: ReactionChoice::Attack,
                on_weak: ReactionChoice::Flee,
                on_strong: ReactionChoice::Attack,
            };
            let (def_miss, _) = payoff_against(
                &ch,
                &game,
                &AdversaryStrategy {
                    target: s,
                    reaction: flee_on_weak,
                },
            );
            let caught_on_miss = if r == s { 1.0 } else { 0.0 };
            let expected_miss = gamma * (caught_on_miss * 1.0 + (1.0 - caught_on_miss) * -1.0);
            assert!(
                (def_miss - expected_miss).abs() < 1e-12,
                "miss branch case ({p},{r},{s})"
            );
        }
    }

    #[test]
    fn report_json_shape() {
        let game = k2_game();
        let ch = k2_chromosome();
        let report = best_response(&ch, &game);
        let json = report.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["defender_payoff"].is_number());
        assert!(value["adversary_payoff"].is_number());
        assert!(value["target"].is_number());
        for key in ["n", "s0", "s1"] {
            let choice = value["reaction"][key].as_str().unwrap();
            assert!(choice == "attack" || choice == "flee");
        }
    }
}
