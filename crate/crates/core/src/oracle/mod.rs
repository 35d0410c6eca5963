//! Reference engines used to validate the generator and the certifier:
//! concrete steps on rational valuations, exhaustive exploration of the
//! abstracted zone graph without subsumption, a textbook nested DFS on the
//! result, and the trivial certificate made of every reachable node.

pub mod semantics;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::certifier::{Certificate, CertificateEntry};
use crate::dbm::LuBounds;
use crate::model::{Atom, CmpOp, LocationId, TimedAutomaton};
use crate::theory::{self, FiniteGraph};
use crate::zone_graph::{
    initial_state, initial_state_abstracted, successors, successors_abstracted, SubsumptionMode,
    SymbolicState,
};

pub const DEFAULT_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("exploration exceeded {cap} symbolic states")]
    CapExceeded { cap: usize },
    #[error("the automaton has an accepting run; no certificate exists")]
    Nonempty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleVerdict {
    Empty,
    Nonempty,
}

impl fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleVerdict::Empty => "empty",
            OracleVerdict::Nonempty => "nonempty",
        })
    }
}

/// Reachable part of a zone graph; node 0 is the initial state.
#[derive(Debug, Clone)]
pub struct ExploredGraph {
    pub nodes: Vec<SymbolicState>,
    pub graph: FiniteGraph,
}

impl ExploredGraph {
    pub fn position(&self, s: &SymbolicState) -> Option<usize> {
        self.nodes.iter().position(|n| n == s)
    }
}

fn explore(
    ta: &TimedAutomaton,
    cap: usize,
    init: SymbolicState,
    post: impl Fn(&SymbolicState) -> Vec<(usize, SymbolicState)>,
) -> Result<ExploredGraph, OracleError> {
    let mut index: HashMap<SymbolicState, usize> = HashMap::new();
    let mut nodes = vec![init.clone()];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new()];
    index.insert(init, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for (_, t) in post(&nodes[v]) {
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    if nodes.len() >= cap {
                        return Err(OracleError::CapExceeded { cap });
                    }
                    let id = nodes.len();
                    index.insert(t.clone(), id);
                    nodes.push(t);
                    adjacency.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            if !adjacency[v].contains(&id) {
                adjacency[v].push(id);
            }
        }
    }
    let accepting = nodes.iter().map(|s| ta.is_accepting(s.location)).collect();
    let edges = adjacency
        .iter()
        .enumerate()
        .flat_map(|(s, succ)| succ.iter().map(move |&t| (s, t)));
    let graph = FiniteGraph::from_edges(accepting, edges).expect("ids are dense");
    Ok(ExploredGraph { nodes, graph })
}

/// Breadth-first exploration of the `Extra+_LU` zone graph with exact
/// deduplication.
pub fn explore_full(
    ta: &TimedAutomaton,
    lu: &LuBounds,
    cap: usize,
) -> Result<ExploredGraph, OracleError> {
    explore(ta, cap, initial_state_abstracted(ta, lu), |s| {
        successors_abstracted(ta, lu, s)
    })
}

/// Same without extrapolation; may not terminate below the cap.
pub fn explore_unabstracted(ta: &TimedAutomaton, cap: usize) -> Result<ExploredGraph, OracleError> {
    explore(ta, cap, initial_state(ta), |s| successors(ta, s))
}

/// Nested DFS (blue post-order seeds a red search for the seed itself).
pub fn nested_dfs(g: &FiniteGraph, root: usize) -> bool {
    let n = g.len();
    if n == 0 {
        return false;
    }
    let mut blue = vec![false; n];
    let mut red = vec![false; n];
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    blue[root] = true;
    while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
        let succ = g.successors(v);
        if *pos < succ.len() {
            let w = succ[*pos];
            *pos += 1;
            if !blue[w] {
                blue[w] = true;
                stack.push((w, 0));
            }
            continue;
        }
        stack.pop();
        if g.is_accepting(v) && red_reaches(g, &mut red, v) {
            return true;
        }
    }
    false
}

fn red_reaches(g: &FiniteGraph, red: &mut [bool], seed: usize) -> bool {
    let mut stack = vec![seed];
    while let Some(v) = stack.pop() {
        for &w in g.successors(v) {
            if w == seed {
                return true;
            }
            if !red[w] {
                red[w] = true;
                stack.push(w);
            }
        }
    }
    false
}

pub fn reference_emptiness(
    ta: &TimedAutomaton,
    lu: &LuBounds,
    cap: usize,
) -> Result<OracleVerdict, OracleError> {
    let explored = explore_full(ta, lu, cap)?;
    Ok(verdict_of(&explored))
}

pub fn verdict_of(explored: &ExploredGraph) -> OracleVerdict {
    if nested_dfs(&explored.graph, 0) {
        OracleVerdict::Nonempty
    } else {
        OracleVerdict::Empty
    }
}

/// Every reachable node of the abstracted zone graph, numbered by SCC.
/// Checked in inclusion mode.
pub fn trivial_certificate(
    ta: &TimedAutomaton,
    lu: &LuBounds,
    cap: usize,
) -> Result<Certificate, OracleError> {
    let explored = explore_full(ta, lu, cap)?;
    if theory::has_accepting_cycle(&explored.graph) {
        return Err(OracleError::Nonempty);
    }
    let f = theory::scc_numbering(&explored.graph);
    let entries = explored
        .nodes
        .into_iter()
        .zip(f.values())
        .map(|(s, &n)| CertificateEntry::new(s.location, s.zone, n))
        .collect();
    Ok(Certificate::new(SubsumptionMode::Inclusion, entries))
}

pub fn atom_holds(atom: &Atom, v: &[Rational64]) -> bool {
    let x = v[atom.clock];
    let c = Rational64::from_integer(i64::from(atom.constant));
    match atom.op {
        CmpOp::Lt => x < c,
        CmpOp::Le => x <= c,
        CmpOp::Eq => x == c,
        CmpOp::Ge => x >= c,
        CmpOp::Gt => x > c,
    }
}

pub fn satisfies(atoms: &[Atom], v: &[Rational64]) -> bool {
    atoms.iter().all(|a| atom_holds(a, v))
}

/// `(q, v) →_{δ, edge} (q', v')`: delay by `delta` inside `I(q)`, take
/// `edge` (which must leave `q`), land inside `I(q')`.
pub fn concrete_step(
    ta: &TimedAutomaton,
    location: LocationId,
    v: &[Rational64],
    delta: Rational64,
    edge: usize,
) -> Option<(LocationId, Vec<Rational64>)> {
    let e = &ta.edges()[edge];
    if e.source != location || delta < Rational64::from_integer(0) {
        return None;
    }
    let inv = ta.invariant(location);
    let delayed: Vec<Rational64> = v.iter().map(|&x| x + delta).collect();
    // invariants are convex, so both endpoints suffice
    if !satisfies(inv, v) || !satisfies(inv, &delayed) || !satisfies(&e.guard, &delayed) {
        return None;
    }
    let mut next = delayed;
    for &c in &e.resets {
        next[c] = Rational64::from_integer(0);
    }
    satisfies(ta.invariant(e.target), &next).then_some((e.target, next))
}
