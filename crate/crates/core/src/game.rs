//! Game instances: graph, per-target utilities, resource counts, and the two
//! uncertainty parameters (detection rate `gamma`, observation matrix `pi`).
//!
//! Instances are immutable after construction; every constructor and loader
//! runs full validation, so downstream code can rely on the invariants
//! without re-checking them.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column/row order of the three signaling states: no sensor present, weak
/// signal, strong signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalState {
    /// No sensor at the target (`n`).
    NoSensor,
    /// Weak signal (`s0`).
    Weak,
    /// Strong signal (`s1`).
    Strong,
}

impl SignalState {
    pub const ALL: [SignalState; 3] = [SignalState::NoSensor, SignalState::Weak, SignalState::Strong];

    pub fn index(self) -> usize {
        match self {
            SignalState::NoSensor => 0,
            SignalState::Weak => 1,
            SignalState::Strong => 2,
        }
    }
}

/// Undirected simple graph over dense vertex ids `0..num_vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Edges are unordered pairs; loops,
    /// duplicates (in either orientation) and out-of-range endpoints are
    /// rejected.
    pub fn new(num_vertices: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::validation("num_vertices", "must be positive"));
        }
        let mut edges = BTreeSet::new();
        for &(u, v) in edge_list {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::validation(
                    "edges",
                    format!("endpoint out of range in edge ({u}, {v})"),
                ));
            }
            if u == v {
                return Err(Error::validation("edges", format!("self-loop at vertex {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !edges.insert(key) {
                return Err(Error::validation(
                    "edges",
                    format!("duplicate edge ({}, {})", key.0, key.1),
                ));
            }
        }
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            num_vertices,
            edges,
            adjacency,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(low, high)` pairs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Vertices sharing an edge with `v`, sorted ascending. Never contains `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
}

/// Payoffs attached to one target vertex. The flee outcome is the constant
/// pair `(0, 0)` and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexUtilities {
    /// Defender payoff when the adversary is caught here (positive).
    pub def_caught: f64,
    /// Defender payoff when an attack here succeeds (negative).
    pub def_attacked: f64,
    /// Adversary payoff when an attack here succeeds (positive).
    pub adv_success: f64,
    /// Adversary payoff when caught here (negative).
    pub adv_caught: f64,
}

impl VertexUtilities {
    fn validate(&self, vertex: usize) -> Result<()> {
        let checks = [
            ("def_caught", self.def_caught, 1.0),
            ("def_attacked", self.def_attacked, -1.0),
            ("adv_success", self.adv_success, 1.0),
            ("adv_caught", self.adv_caught, -1.0),
        ];
        for (field, value, sign) in checks {
            if !value.is_finite() {
                return Err(Error::validation(
                    format!("utilities[{vertex}].{field}"),
                    "must be finite",
                ));
            }
            if value * sign <= 0.0 {
                let expected = if sign > 0.0 { "positive" } else { "negative" };
                return Err(Error::validation(
                    format!("utilities[{vertex}].{field}"),
                    format!("must be {expected}, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// Observational uncertainty: `pi[observed][true_state]` with state order
/// `[n, s0, s1]` on both axes. Columns are probability distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyMatrix {
    rows: [[f64; 3]; 3],
}

pub const COLUMN_SUM_TOLERANCE: f64 = 1e-9;

impl UncertaintyMatrix {
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self> {
        let m = UncertaintyMatrix { rows };
        m.validate()?;
        Ok(m)
    }

    pub fn identity() -> Self {
        UncertaintyMatrix {
            rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// The one-parameter family used by the benchmark generator:
    /// `[[1, k, k/2], [0, 1-k, k/2], [0, 0, 1-k]]`.
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::validation(
                "kappa",
                format!("must lie in [0, 1], got {kappa}"),
            ));
        }
        Ok(UncertaintyMatrix {
            rows: [
                [1.0, kappa, kappa / 2.0],
                [0.0, 1.0 - kappa, kappa / 2.0],
                [0.0, 0.0, 1.0 - kappa],
            ],
        })
    }

    /// `P[observed | true_state]`.
    pub fn observe_prob(&self, observed: SignalState, true_state: SignalState) -> f64 {
        self.rows[observed.index()][true_state.index()]
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::validation(
                        format!("pi[{i}][{j}]"),
                        format!("must lie in [0, 1], got {p}"),
                    ));
                }
            }
        }
        for col in 0..3 {
            let sum: f64 = (0..3).map(|row| self.rows[row][col]).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOLERANCE {
                return Err(Error::validation(
                    format!("pi column {col}"),
                    format!("must sum to 1, got {sum}"),
                ));
            }
        }
        Ok(())
    }
}

/// A complete, validated game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    name: String,
    graph: Graph,
    num_patrollers: usize,
    num_sensors: usize,
    gamma: f64,
    pi: UncertaintyMatrix,
    utilities: Vec<VertexUtilities>,
}

impl GameInstance {
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        num_patrollers: usize,
        num_sensors: usize,
        gamma: f64,
        pi: UncertaintyMatrix,
        utilities: Vec<VertexUtilities>,
    ) -> Result<Self> {
        if num_patrollers < 1 {
            return Err(Error::validation("num_patrollers", "must be at least 1"));
        }
        if num_patrollers + num_sensors > graph.num_vertices() {
            return Err(Error::validation(
                "num_patrollers + num_sensors",
                format!(
                    "{} + {} exceeds the {} vertices; no duplicate-free allocation exists",
                    num_patrollers,
                    num_sensors,
                    graph.num_vertices()
                ),
            ));
        }
        if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::validation(
                "gamma",
                format!("must lie in [0, 1], got {gamma}"),
            ));
        }
        if utilities.len() != graph.num_vertices() {
            return Err(Error::validation(
                "utilities",
                format!(
                    "expected one entry per vertex ({}), got {}",
                    graph.num_vertices(),
                    utilities.len()
                ),
            ));
        }
        for (v, u) in utilities.iter().enumerate() {
            u.validate(v)?;
        }
        pi.validate()?;
        Ok(GameInstance {
            name: name.into(),
            graph,
            num_patrollers,
            num_sensors,
            gamma,
            pi,
            utilities,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_patrollers(&self) -> usize {
        self.num_patrollers
    }

    pub fn num_sensors(&self) -> usize {
        self.num_sensors
    }

    /// False-negative detection probability of a sensor.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pi(&self) -> &UncertaintyMatrix {
        &self.pi
    }

    pub fn utilities(&self, vertex: usize) -> &VertexUtilities {
        &self.utilities[vertex]
    }

    /// Decodes and validates a game from its JSON representation.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: GameWire =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("game JSON: {e}")))?;
        let graph = Graph::new(
            wire.num_vertices,
            &wire.edges.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>(),
        )?;
        let pi = UncertaintyMatrix::new(wire.pi)?;
        GameInstance::new(
            wire.name,
            graph,
            wire.num_patrollers,
            wire.num_sensors,
            wire.gamma,
            pi,
            wire.utilities,
        )
    }

    /// Canonical JSON encoding: fixed key order, edges sorted
    /// lexicographically, floats printed with at most 12 significant digits.
    /// Saving, loading, and saving again yields identical bytes.
    pub fn to_canonical_json(&self) -> String {
        let mut out = String::with_capacity(256 + 96 * self.num_vertices());
        out.push_str("{\"name\":");
        out.push_str(&serde_json::to_string(&self.name).expect("string encoding"));
        let _ = write!(out, ",\"num_vertices\":{}", self.num_vertices());
        out.push_str(",\"edges\":[");
        for (i, (u, v)) in self.graph.edges().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{u},{v}]");
        }
        let _ = write!(
            out,
            "],\"num_patrollers\":{},\"num_sensors\":{}",
            self.num_patrollers, self.num_sensors
        );
        out.push_str(",\"gamma\":");
        out.push_str(&format_float(self.gamma));
        out.push_str(",\"pi\":[");
        for (i, row) in self.pi.rows().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (j, &p) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format_float(p));
            }
            out.push(']');
        }
        out.push_str("],\"utilities\":[");
        for (i, u) in self.utilities.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "{{\"def_caught\":{},\"def_attacked\":{},\"adv_success\":{},\"adv_caught\":{}}}",
                format_float(u.def_caught),
                format_float(u.def_attacked),
                format_float(u.adv_success),
                format_float(u.adv_caught)
            );
        }
        out.push_str("]}");
        out
    }
}

#[derive(Deserialize)]
struct GameWire {
    name: String,
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    num_patrollers: usize,
    num_sensors: usize,
    gamma: f64,
    pi: [[f64; 3]; 3],
    utilities: Vec<VertexUtilities>,
}

/// Formats a float with at most 12 significant digits, preferring the
/// shortest representation that round-trips. The output re-parses to a value
/// whose canonical form is the same string, so serialization is stable.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let shortest = format!("{x}");
    if significant_digits(&shortest) <= 12 {
        return shortest;
    }
    let quantized: f64 = format!("{x:.11e}").parse().expect("float re-parse");
    format!("{quantized}")
}

/// Rounds to 12 significant digits so the value survives canonical
/// serialization exactly. Generators quantize every sampled float with this.
pub fn quantize_float(x: f64) -> f64 {
    format_float(x).parse().expect("float re-parse")
}

fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or(s);
    let digits: Vec<u8> = mantissa.bytes().filter(|b| b.is_ascii_digit()).collect();
    let leading = digits.iter().take_while(|&&b| b == b'0').count();
    let trailing = digits.iter().rev().take_while(|&&b| b == b'0').count();
    digits.len().saturating_sub(leading + trailing.min(digits.len() - leading))
}
