//! Solver toolkit for security games with signaling.
//!
//! The defender places `k` patrollers and `l` sensors on the vertices of a
//! graph, commits to a reaction-stage reallocation plan for every patroller,
//! and to a randomized signaling scheme for the sensors. Sensors detect an
//! intruder imperfectly (false-negative rate `gamma`) and emit a weak or a
//! strong signal; the adversary observes the signaling state through a noisy
//! channel (a column-stochastic matrix over the states `{n, s0, s1}`), then
//! attacks or flees. The solver searches the space of defender mixed
//! strategies with an evolutionary loop whose fitness is the defender's
//! expected payoff against an exactly computed adversary best response.
//!
//! Crate layout:
//!
//! - [`game`] — game instances (graph, utilities, uncertainty) and their
//!   canonical JSON representation,
//! - [`strategy`] — pure strategies, chromosomes (mixed strategies plus
//!   signaling tables), feasibility repair,
//! - [`eval`] — analytic expected payoffs and adversary best response,
//! - [`evolve`] — the evolutionary solver loop and its operators,
//! - [`generator`] — benchmark game families and suite generation,
//! - [`oracle`] — an independent Monte-Carlo playout simulator used to
//!   validate the analytic evaluator.

pub mod error;
pub mod eval;
pub mod evolve;
pub mod game;
pub mod generator;
pub mod oracle;
pub mod rng;
pub mod strategy;

pub use error::{Error, Result};
pub use eval::{AdversaryStrategy, EvalReport, Reaction, ReactionChoice};
pub use evolve::{EvolveParams, SolveResult};
pub use game::{GameInstance, Graph, SignalState, UncertaintyMatrix, VertexUtilities};
pub use strategy::{AllocationState, Chromosome, PureStrategy, SensorState, SignalingTable};
