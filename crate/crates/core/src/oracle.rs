//! Independent Monte-Carlo playout simulator of the game timeline, used to
//! validate the analytic evaluator.
//!
//! The playout samples the defender's pure strategy, the detection outcome,
//! the emitted signal, and the adversary's observation step by step, exactly
//! as the game unfolds. It derives target states and resolves terminals with
//! its own branch logic rather than reusing the evaluator's, which is the
//! point: agreement between the two paths is evidence, not tautology.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{payoff_against, AdversaryStrategy, Reaction, ReactionChoice};
use crate::game::{GameInstance, SignalState};
use crate::rng::derive_rng;
use crate::strategy::Chromosome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Caught,
    AttackSuccessful,
    AttackInterrupted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayoutOutcome {
    pub terminal: Terminal,
    pub defender_payoff: f64,
    pub adversary_payoff: f64,
}

/// What a sampled pure strategy puts at the attacked vertex; this is the
/// oracle's own classification, derived from raw membership checks.
#[derive(Debug, Clone, Copy, PartialEq)]
enum TargetSituation {
    Patroller,
    /// No resource at the target; `caught` tells whether a patroller's legal
    /// reaction-stage move lands on it.
    Uncovered { caught: bool },
    Sensor {
        /// Some patroller legally moves here in the reaction stage.
        visited: bool,
        /// Some patroller sits on an adjacent vertex.
        adjacent: bool,
        /// P(weak signal) on detection.
        psi: f64,
        /// P(weak signal) on a missed detection.
        phi: f64,
    },
}

/// Everything the playout loop needs for one (chromosome, target) pair.
struct PlayoutContext {
    cumulative: Vec<f64>,
    situations: Vec<TargetSituation>,
    gamma: f64,
    /// `pi` transposed into columns: `columns[true_state][observed]`.
    columns: [[f64; 3]; 3],
    def_caught: f64,
    def_attacked: f64,
    adv_success: f64,
    adv_caught: f64,
}

impl PlayoutContext {
    fn new(ch: &Chromosome, game: &GameInstance, target: usize) -> Self {
        let graph = game.graph();
        let mut cumulative = Vec::with_capacity(ch.strategies.len());
        let mut situations = Vec::with_capacity(ch.strategies.len());
        let mut acc = 0.0;
        for w in &ch.strategies {
            acc += w.prob;
            cumulative.push(acc);
            let e = &w.strategy;
            let has_patroller = e.patrollers.contains(&target);
            let situation = if has_patroller {
                TargetSituation::Patroller
            } else {
                let legal_visit = e
                    .patrollers
                    .iter()
                    .zip(&e.reallocation)
                    .any(|(&p, &r)| r == target && (p == target || graph.has_edge(p, target)));
                if e.sensors.contains(&target) {
                    let adjacent = e.patrollers.iter().any(|&p| graph.has_edge(p, target));
                    let state = if legal_visit {
                        crate::strategy::SensorState::Visited
                    } else if adjacent {
                        crate::strategy::SensorState::Adjacent
                    } else {
                        crate::strategy::SensorState::Unprotected
                    };
                    TargetSituation::Sensor {
                        visited: legal_visit,
                        adjacent,
                        psi: ch.signaling.psi(state, target),
                        phi: ch.signaling.phi(state, target),
                    }
                } else {
                    TargetSituation::Uncovered {
                        caught: legal_visit,
                    }
                }
            };
            situations.push(situation);
        }
        let rows = game.pi().rows();
        let mut columns = [[0.0; 3]; 3];
        for (r, row) in rows.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                columns[c][r] = p;
            }
        }
        let u = game.utilities(target);
        PlayoutContext {
            cumulative,
            situations,
            gamma: game.gamma(),
            columns,
            def_caught: u.def_caught,
            def_attacked: u.def_attacked,
            adv_success: u.adv_success,
            adv_caught: u.adv_caught,
        }
    }

    fn play(&self, reaction: Reaction, rng: &mut impl Rng) -> Terminal {
        // Defender commits to a pure strategy.
        let strategy_idx = if self.cumulative.len() == 1 {
            0
        } else {
            let draw = rng.gen::<f64>() * self.cumulative.last().unwrap();
            self.cumulative
                .iter()
                .position(|&c| draw < c)
                .unwrap_or(self.cumulative.len() - 1)
        };
        // Resolve detection and signaling at the target.
        let (true_state, caught_if_attacked) = match self.situations[strategy_idx] {
            TargetSituation::Patroller => (SignalState::NoSensor, true),
            TargetSituation::Uncovered { caught } => (SignalState::NoSensor, caught),
            TargetSituation::Sensor {
                visited,
                adjacent,
                psi,
                phi,
            } => {
                let detected = rng.gen::<f64>() >= self.gamma;
                let p_weak = if detected { psi } else { phi };
                let signal = if rng.gen::<f64>() < p_weak {
                    SignalState::Weak
                } else {
                    SignalState::Strong
                };
                let caught = if detected {
                    visited || adjacent
                } else {
                    visited
                };
                (signal, caught)
            }
        };
        // The adversary observes through the uncertainty channel and reacts.
        let column = &self.columns[true_state.index()];
        let draw = rng.gen::<f64>();
        let observed = if draw < column[0] {
            SignalState::NoSensor
        } else if draw < column[0] + column[1] {
            SignalState::Weak
        } else {
            SignalState::Strong
        };
        match reaction.choice(observed) {
            ReactionChoice::Flee => Terminal::AttackInterrupted,
            ReactionChoice::Attack => {
                if caught_if_attacked {
                    Terminal::Caught
                } else {
                    Terminal::AttackSuccessful
                }
            }
        }
    }

    fn payoffs(&self, terminal: Terminal) -> (f64, f64) {
        match terminal {
            Terminal::Caught => (self.def_caught, self.adv_caught),
            Terminal::AttackSuccessful => (self.def_attacked, self.adv_success),
            Terminal::AttackInterrupted => (0.0, 0.0),
        }
    }
}

/// Simulates one playout of the game timeline.
pub fn simulate_once(
    ch: &Chromosome,
    game: &GameInstance,
    adversary: &AdversaryStrategy,
    rng: &mut impl Rng,
) -> PlayoutOutcome {
    let ctx = PlayoutContext::new(ch, game, adversary.target);
    let terminal = ctx.play(adversary.reaction, rng);
    let (defender_payoff, adversary_payoff) = ctx.payoffs(terminal);
    PlayoutOutcome {
        terminal,
        defender_payoff,
        adversary_payoff,
    }
}

/// Sample means and standard errors over independent playouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean_def: f64,
    pub mean_adv: f64,
    pub stderr_def: f64,
    pub stderr_adv: f64,
    pub samples: u64,
}

/// Counts of the three terminals over a batch of playouts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TerminalCounts {
    pub caught: u64,
    pub successful: u64,
    pub interrupted: u64,
}

pub fn mc_estimate(
    ch: &Chromosome,
    game: &GameInstance,
    adversary: &AdversaryStrategy,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<McEstimate> {
    let (estimate, _) = mc_estimate_with_counts(ch, game, adversary, samples, rng)?;
    Ok(estimate)
}

pub fn mc_estimate_with_counts(
    ch: &Chromosome,
    game: &GameInstance,
    adversary: &AdversaryStrategy,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<(McEstimate, TerminalCounts)> {
    if samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let ctx = PlayoutContext::new(ch, game, adversary.target);
    let mut counts = TerminalCounts::default();
    for _ in 0..samples {
        match ctx.play(adversary.reaction, rng) {
            Terminal::Caught => counts.caught += 1,
            Terminal::AttackSuccessful => counts.successful += 1,
            Terminal::AttackInterrupted => counts.interrupted += 1,
        }
    }
    Ok((estimate_from_counts(&ctx, &counts, samples), counts))
}

/// The payoff takes one of three values per player, so means and standard
/// errors follow from the terminal counts alone.
fn estimate_from_counts(ctx: &PlayoutContext, counts: &TerminalCounts, samples: u64) -> McEstimate {
    let n = samples as f64;
    let moments = |caught_value: f64, success_value: f64| {
        let sum = counts.caught as f64 * caught_value + counts.successful as f64 * success_value;
        let sum_sq = counts.caught as f64 * caught_value * caught_value
            + counts.successful as f64 * success_value * success_value;
        let mean = sum / n;
        let variance = if samples > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (mean, (variance / n).sqrt())
    };
    let (mean_def, stderr_def) = moments(ctx.def_caught, ctx.def_attacked);
    let (mean_adv, stderr_adv) = moments(ctx.adv_caught, ctx.adv_success);
    McEstimate {
        mean_def,
        mean_adv,
        stderr_def,
        stderr_adv,
        samples,
    }
}

/// z-score of a Monte-Carlo mean against an exact value; zero-variance
/// estimates must match the exact value within `1e-9`.
pub fn z_score(mc_mean: f64, stderr: f64, exact: f64) -> f64 {
    let diff = (mc_mean - exact).abs();
    if stderr == 0.0 {
        if diff <= 1e-9 {
            0.0
        } else {
            1e18
        }
    } else {
        diff / stderr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub max_abs_z: f64,
    pub comparisons: usize,
    pub samples_per_comparison: u64,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report encoding")
    }
}

/// Compares Monte-Carlo estimates against the analytic payoffs. On games
/// with at most 10 vertices every adversary pure strategy is checked;
/// larger games use 32 random ones. Passes when every |z| stays within 4.
pub fn validate(
    ch: &Chromosome,
    game: &GameInstance,
    samples: u64,
    rng: &mut impl Rng,
) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let adversaries: Vec<AdversaryStrategy> = if game.num_vertices() <= 10 {
        (0..game.num_vertices())
            .flat_map(|target| {
                Reaction::all()
                    .into_iter()
                    .map(move |reaction| AdversaryStrategy { target, reaction })
            })
            .collect()
    } else {
        let schemes = Reaction::all();
        (0..32)
            .map(|_| AdversaryStrategy {
                target: rng.gen_range(0..game.num_vertices()),
                reaction: schemes[rng.gen_range(0..schemes.len())],
            })
            .collect()
    };
    let batch_seed: u64 = rng.gen();
    let max_abs_z = adversaries
        .par_iter()
        .enumerate()
        .map(|(i, adversary)| {
            let mut batch_rng = derive_rng(batch_seed, i as u64, 0, 0);
            let estimate = mc_estimate(ch, game, adversary, samples, &mut batch_rng)
                .expect("samples checked above");
            let (exact_def, exact_adv) = payoff_against(ch, game, adversary);
            let z_def = z_score(estimate.mean_def, estimate.stderr_def, exact_def);
            let z_adv = z_score(estimate.mean_adv, estimate.stderr_adv, exact_adv);
            z_def.max(z_adv)
        })
        .reduce(|| 0.0, f64::max);
    Ok(ValidationReport {
        pass: max_abs_z <= 4.0,
        max_abs_z,
        comparisons: adversaries.len(),
        samples_per_comparison: samples,
    })
}
