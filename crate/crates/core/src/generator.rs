//! Emptiness checks over the abstracted zone graph with subsumption, and
//! certificate extraction from their output.
//!
//! Both searches return either a lasso (a prefix and an accepting cycle of
//! symbolic states) or a *subsumption graph*: the explored nodes with
//! their proper successor edges (`→`) and the subsumption edges (`⇝`) that
//! were used to prune exploration. On an empty verdict the graph is
//! liveness compatible: no cycle of `→ ∪ ⇝` goes through both an
//! accepting node and a `⇝` edge. A single SCC pass then numbers it.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::certifier::{Certificate, CertificateEntry};
use crate::dbm::LuBounds;
use crate::model::TimedAutomaton;
use crate::theory::{self, FiniteGraph};
use crate::zone_graph::{
    initial_state_abstracted, successors_abstracted, Cover, SubsumptionMode, SymbolicState,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("graph has an accepting cycle through node {node}; it cannot be certified")]
    AcceptingCycle { node: usize },
    #[error("graph has no node {node}")]
    MissingNode { node: usize },
}

/// Explored symbolic states with proper (`edges`) and subsumption
/// (`subsumptions`) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsumptionGraph {
    pub mode: SubsumptionMode,
    pub nodes: Vec<SymbolicState>,
    pub accepting: Vec<bool>,
    pub edges: Vec<(usize, usize)>,
    pub subsumptions: Vec<(usize, usize)>,
    pub initial: usize,
}

impl SubsumptionGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn validate(&self) -> Result<(), GeneratorError> {
        let n = self.nodes.len();
        let bad = self
            .edges
            .iter()
            .chain(&self.subsumptions)
            .flat_map(|&(u, v)| [u, v])
            .chain((!self.nodes.is_empty()).then_some(self.initial))
            .find(|&x| x >= n);
        match bad {
            Some(node) => Err(GeneratorError::MissingNode { node }),
            None if self.accepting.len() != n => Err(GeneratorError::MissingNode {
                node: self.accepting.len().min(n),
            }),
            None => Ok(()),
        }
    }

    /// The graph `→ ∪ ⇝` with accepting flags.
    pub fn finite_graph(&self) -> FiniteGraph {
        FiniteGraph::from_edges(
            self.accepting.clone(),
            self.edges.iter().chain(&self.subsumptions).copied(),
        )
        .expect("edges refer to existing nodes")
    }

    /// No SCC of `→ ∪ ⇝` contains both an accepting node and a `⇝` edge.
    pub fn is_liveness_compatible(&self) -> bool {
        let g = self.finite_graph();
        let (comp, count) = theory::strongly_connected_components(&g);
        let mut has_acc = vec![false; count];
        for (v, &c) in comp.iter().enumerate() {
            has_acc[c] |= self.accepting[v];
        }
        !self
            .subsumptions
            .iter()
            .any(|&(u, v)| comp[u] == comp[v] && has_acc[comp[u]])
    }

    /// Every `⇝` edge joins nodes at one location whose zones are covered.
    pub fn subsumptions_valid(&self, cover: &Cover) -> bool {
        self.subsumptions
            .iter()
            .all(|&(u, v)| cover.covers_state(&self.nodes[u], &self.nodes[v]))
    }

    /// Every node is reachable from the initial node along `→ ∪ ⇝`.
    pub fn all_reachable(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let g = self.finite_graph();
        let mut seen = vec![false; g.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(v) = stack.pop() {
            for &w in g.successors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// A run `prefix · cycle^ω` of symbolic states; `cycle` contains an
/// accepting state and its last state steps back to its first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<SymbolicState>,
    pub cycle: Vec<SymbolicState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emptiness {
    Empty(SubsumptionGraph),
    Nonempty(Lasso),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub outcome: Emptiness,
    /// Distinct symbolic states created by the (last) exploration.
    pub states: usize,
    /// Exploration rounds; always 1 for NDFS.
    pub iterations: usize,
}

impl CheckResult {
    pub fn is_empty(&self) -> bool {
        matches!(self.outcome, Emptiness::Empty(_))
    }

    pub fn graph(&self) -> Option<&SubsumptionGraph> {
        match &self.outcome {
            Emptiness::Empty(g) => Some(g),
            Emptiness::Nonempty(_) => None,
        }
    }

    pub fn lasso(&self) -> Option<&Lasso> {
        match &self.outcome {
            Emptiness::Empty(_) => None,
            Emptiness::Nonempty(l) => Some(l),
        }
    }
}

/// Interned states with per-node successor lists, shared by both searches.
struct Explorer<'a> {
    ta: &'a TimedAutomaton,
    lu: &'a LuBounds,
    cover: Cover,
    nodes: Vec<SymbolicState>,
    index: HashMap<SymbolicState, usize>,
    succ: Vec<Option<Vec<usize>>>,
}

impl<'a> Explorer<'a> {
    fn new(ta: &'a TimedAutomaton, lu: &'a LuBounds, mode: SubsumptionMode) -> Self {
        Self {
            ta,
            lu,
            cover: Cover::new(mode, lu.clone()),
            nodes: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
        }
    }

    /// Id of `s`, and whether it was just created.
    fn intern(&mut self, s: SymbolicState) -> (usize, bool) {
        if let Some(&id) = self.index.get(&s) {
            return (id, false);
        }
        let id = self.nodes.len();
        self.index.insert(s.clone(), id);
        self.nodes.push(s);
        self.succ.push(None);
        (id, true)
    }

    fn initial(&mut self) -> usize {
        let s = initial_state_abstracted(self.ta, self.lu);
        self.intern(s).0
    }

    /// Successor ids of `v` in edge order, deduplicated.
    fn expand(&mut self, v: usize) -> Vec<usize> {
        if let Some(s) = &self.succ[v] {
            return s.clone();
        }
        let mut out = Vec::new();
        for (_, t) in successors_abstracted(self.ta, self.lu, &self.nodes[v]) {
            let (id, _) = self.intern(t);
            if !out.contains(&id) {
                out.push(id);
            }
        }
        self.succ[v] = Some(out.clone());
        out
    }

    fn accepting(&self, v: usize) -> bool {
        self.ta.is_accepting(self.nodes[v].location)
    }

    fn accepting_flags(&self) -> Vec<bool> {
        (0..self.nodes.len()).map(|v| self.accepting(v)).collect()
    }

    fn states(&self, ids: &[usize]) -> Vec<SymbolicState> {
        ids.iter().map(|&v| self.nodes[v].clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Color {
    White,
    Cyan,
    Blue,
    Red,
    Pruned,
}

/// Nested DFS with pruning of blue states covered by a red state.
pub fn ndfs_emptiness(ta: &TimedAutomaton, lu: &LuBounds, mode: SubsumptionMode) -> CheckResult {
    let mut ex = Explorer::new(ta, lu, mode);
    let init = ex.initial();
    let mut color = vec![Color::White];
    let mut red_at: Vec<Vec<usize>> = vec![Vec::new(); ta.locations().len()];
    let mut subsumptions = Vec::new();

    // blue stack frames: (node, successors, next position)
    let mut blue: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let visit = |v: usize,
                 ex: &mut Explorer,
                 color: &mut Vec<Color>,
                 red_at: &Vec<Vec<usize>>,
                 subsumptions: &mut Vec<(usize, usize)>|
     -> Option<Vec<usize>> {
        let s = &ex.nodes[v];
        let cover = red_at[s.location.0]
            .iter()
            .copied()
            .find(|&r| ex.cover.covers(&s.zone, &ex.nodes[r].zone));
        if let Some(r) = cover {
            color[v] = Color::Pruned;
            subsumptions.push((v, r));
            return None;
        }
        color[v] = Color::Cyan;
        let succ = ex.expand(v);
        color.resize(ex.nodes.len(), Color::White);
        Some(succ)
    };

    if let Some(succ) = visit(init, &mut ex, &mut color, &red_at, &mut subsumptions) {
        blue.push((init, succ, 0));
    }
    while let Some((v, succ, pos)) = blue.last_mut() {
        let v = *v;
        if *pos < succ.len() {
            let w = succ[*pos];
            *pos += 1;
            if color[w] == Color::White {
                if let Some(s) = visit(w, &mut ex, &mut color, &red_at, &mut subsumptions) {
                    blue.push((w, s, 0));
                }
            }
            continue;
        }
        if ex.accepting(v) {
            if let Some(red_path) = red_search(&ex, &mut color, &mut red_at, v) {
                let target = *red_path.last().expect("red path ends at a cyan node");
                let stack: Vec<usize> = blue.iter().map(|f| f.0).collect();
                let at = stack
                    .iter()
                    .position(|&x| x == target)
                    .expect("cyan nodes are on the blue stack");
                let mut cycle = stack[at..].to_vec();
                cycle.extend(&red_path[..red_path.len() - 1]);
                let states = ex.nodes.len();
                return CheckResult {
                    outcome: Emptiness::Nonempty(Lasso {
                        prefix: ex.states(&stack[..at]),
                        cycle: ex.states(&cycle),
                    }),
                    states,
                    iterations: 1,
                };
            }
            color[v] = Color::Red;
            red_at[ex.nodes[v].location.0].push(v);
        } else {
            color[v] = Color::Blue;
        }
        blue.pop();
    }

    let edges = (0..ex.nodes.len())
        .filter(|&v| color[v] != Color::Pruned)
        .flat_map(|v| {
            ex.succ[v]
                .iter()
                .flatten()
                .map(move |&w| (v, w))
                .collect::<Vec<_>>()
        })
        .collect();
    let states = ex.nodes.len();
    let accepting = ex.accepting_flags();
    CheckResult {
        outcome: Emptiness::Empty(SubsumptionGraph {
            mode,
            nodes: ex.nodes,
            accepting,
            edges,
            subsumptions,
            initial: init,
        }),
        states,
        iterations: 1,
    }
}

/// Red DFS from the accepting `seed`. Returns the path `seed, …, c` to a
/// cyan node `c` if one is reachable (the path starts at a successor of
/// `seed`; `seed` itself is not repeated unless it is `c`).
fn red_search(
    ex: &Explorer,
    color: &mut [Color],
    red_at: &mut [Vec<usize>],
    seed: usize,
) -> Option<Vec<usize>> {
    let succ_of = |v: usize| ex.succ[v].as_deref().unwrap_or(&[]);
    let mut stack: Vec<(usize, usize)> = vec![(seed, 0)];
    while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
        let succ = succ_of(v);
        if *pos == succ.len() {
            stack.pop();
            continue;
        }
        let w = succ[*pos];
        *pos += 1;
        match color[w] {
            Color::Cyan => {
                let mut path: Vec<usize> = stack[1..].iter().map(|f| f.0).collect();
                path.push(w);
                return Some(path);
            }
            Color::Blue => {
                color[w] = Color::Red;
                red_at[ex.nodes[w].location.0].push(w);
                stack.push((w, 0));
            }
            Color::White | Color::Red | Color::Pruned => {}
        }
    }
    None
}

/// Reachability with maximal subsumption followed by an SCC check,
/// repeated with fewer subsumptions until the graph is liveness compatible
/// or a genuine accepting cycle shows up.
pub fn iterative_scc_emptiness(
    ta: &TimedAutomaton,
    lu: &LuBounds,
    mode: SubsumptionMode,
) -> CheckResult {
    let mut no_subsume: HashSet<SymbolicState> = HashSet::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let round = explore_with_subsumption(ta, lu, mode, &no_subsume);
        let g = round.finite_graph();
        let (comp, count) = theory::strongly_connected_components(&g);
        let mut size = vec![0usize; count];
        let mut has_acc = vec![false; count];
        for (v, &c) in comp.iter().enumerate() {
            size[c] += 1;
            has_acc[c] |= round.accepting[v];
        }
        let mut has_sub = vec![false; count];
        for &(u, v) in &round.subsumptions {
            if comp[u] == comp[v] {
                has_sub[comp[u]] = true;
            }
        }
        let mut self_loop = vec![false; count];
        for &(u, v) in &round.edges {
            if u == v {
                self_loop[comp[u]] = true;
            }
        }

        let genuine = (0..round.len()).find(|&v| {
            let c = comp[v];
            round.accepting[v] && (size[c] > 1 || self_loop[c]) && !has_sub[c]
        });
        if let Some(a) = genuine {
            let states = round.len();
            return CheckResult {
                outcome: Emptiness::Nonempty(lasso_through(&round, &comp, a)),
                states,
                iterations,
            };
        }

        let before = no_subsume.len();
        for &(u, v) in &round.subsumptions {
            if comp[u] == comp[v] && has_acc[comp[u]] {
                no_subsume.insert(round.nodes[u].clone());
            }
        }
        if no_subsume.len() == before {
            let states = round.len();
            return CheckResult {
                outcome: Emptiness::Empty(round),
                states,
                iterations,
            };
        }
    }
}

fn explore_with_subsumption(
    ta: &TimedAutomaton,
    lu: &LuBounds,
    mode: SubsumptionMode,
    no_subsume: &HashSet<SymbolicState>,
) -> SubsumptionGraph {
    let mut ex = Explorer::new(ta, lu, mode);
    let init = ex.initial();
    let mut live_at: Vec<Vec<usize>> = vec![Vec::new(); ta.locations().len()];
    live_at[ex.nodes[init].location.0].push(init);
    let mut edges = Vec::new();
    let mut seen_edges = HashSet::new();
    let mut subsumptions = Vec::new();
    let mut queue = VecDeque::from([init]);

    while let Some(v) = queue.pop_front() {
        let succ = successors_abstracted(ta, lu, &ex.nodes[v]);
        for (_, t) in succ {
            if let Some(&id) = ex.index.get(&t) {
                if seen_edges.insert((v, id)) {
                    edges.push((v, id));
                }
                continue;
            }
            let cover = if no_subsume.contains(&t) {
                None
            } else {
                live_at[t.location.0]
                    .iter()
                    .copied()
                    .find(|&w| ex.cover.covers(&t.zone, &ex.nodes[w].zone))
            };
            let loc = t.location.0;
            let (id, _) = ex.intern(t);
            seen_edges.insert((v, id));
            edges.push((v, id));
            match cover {
                Some(w) => subsumptions.push((id, w)),
                None => {
                    live_at[loc].push(id);
                    queue.push_back(id);
                }
            }
        }
    }

    let accepting = ex.accepting_flags();
    SubsumptionGraph {
        mode,
        nodes: ex.nodes,
        accepting,
        edges,
        subsumptions,
        initial: init,
    }
}

/// Lasso through accepting node `a` whose SCC uses only `→` edges.
fn lasso_through(g: &SubsumptionGraph, comp: &[usize], a: usize) -> Lasso {
    let mut adj = vec![Vec::new(); g.len()];
    for &(u, v) in &g.edges {
        adj[u].push(v);
    }
    let prefix = bfs_path(&adj, g.initial, a, false, |_| true);
    let cycle = bfs_path(&adj, a, a, true, |w| comp[w] == comp[a]);
    let states = |ids: &[usize]| ids.iter().map(|&v| g.nodes[v].clone()).collect();
    Lasso {
        prefix: states(&prefix[..prefix.len() - 1]),
        cycle: states(&cycle[..cycle.len() - 1]),
    }
}

/// Shortest path `from, …, to` over `adj` restricted to `allowed` nodes;
/// with `cycle` at least one edge is taken. The path must exist.
fn bfs_path(
    adj: &[Vec<usize>],
    from: usize,
    to: usize,
    cycle: bool,
    allowed: impl Fn(usize) -> bool,
) -> Vec<usize> {
    if from == to && !cycle {
        return vec![from];
    }
    let mut parent = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([from]);
    'search: while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if allowed(w) && parent[w] == usize::MAX {
                parent[w] = v;
                if w == to {
                    break 'search;
                }
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    loop {
        cur = parent[cur];
        assert!(cur != usize::MAX, "path exists");
        path.push(cur);
        if cur == from {
            break;
        }
    }
    path.reverse();
    path
}

/// Certificate for an empty verdict: every node, numbered by its SCC in
/// `→ ∪ ⇝`.
pub fn extract_certificate(g: &SubsumptionGraph) -> Result<Certificate, GeneratorError> {
    g.validate()?;
    let fg = g.finite_graph();
    if let Some(node) = theory::accepting_cycle_node(&fg) {
        return Err(GeneratorError::AcceptingCycle { node });
    }
    let f = theory::scc_numbering(&fg);
    let entries = g
        .nodes
        .iter()
        .zip(f.values())
        .map(|(s, &n)| CertificateEntry::new(s.location, s.zone.clone(), n))
        .collect();
    Ok(Certificate::new(g.mode, entries))
}
