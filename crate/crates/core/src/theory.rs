//! Finite transition graphs with an acceptance predicate, and the
//! numbering machinery used to certify the absence of accepting cycles.
//!
//! A [`Numbering`] `f` is *topological* for a graph when every edge
//! `s -> t` satisfies `f(s) >= f(t)`, strictly so when `s` is accepting.
//! Such a numbering exists iff no accepting node lies on a cycle.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("numbering has no value for node {node}")]
    MissingNumbering { node: usize },
    #[error("edge ({from}, {to}) references a node outside 0..{len}")]
    DanglingEdge { from: usize, to: usize, len: usize },
}

/// Explicit finite graph with an accepting flag per node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteGraph {
    accepting: Vec<bool>,
    adjacency: Vec<Vec<usize>>,
}

impl FiniteGraph {
    pub fn new(accepting: Vec<bool>) -> Self {
        let adjacency = vec![Vec::new(); accepting.len()];
        Self {
            accepting,
            adjacency,
        }
    }

    pub fn from_edges(
        accepting: Vec<bool>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TheoryError> {
        let mut g = Self::new(accepting);
        for (from, to) in edges {
            g.add_edge(from, to)?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, accepting: bool) -> usize {
        self.accepting.push(accepting);
        self.adjacency.push(Vec::new());
        self.accepting.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<(), TheoryError> {
        let len = self.len();
        if from >= len || to >= len {
            return Err(TheoryError::DanglingEdge { from, to, len });
        }
        self.adjacency[from].push(to);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.accepting.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepting.is_empty()
    }

    pub fn is_accepting(&self, node: usize) -> bool {
        self.accepting[node]
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(s, succ)| succ.iter().map(move |&t| (s, t)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }
}

/// Natural-number labelling of the nodes of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Numbering(pub Vec<u64>);

impl Numbering {
    pub fn get(&self, node: usize) -> Option<u64> {
        self.0.get(node).copied()
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }
}

pub fn check_topological_numbering(g: &FiniteGraph, f: &Numbering) -> Result<bool, TheoryError> {
    if f.0.len() < g.len() {
        return Err(TheoryError::MissingNumbering { node: f.0.len() });
    }
    Ok(g.edges().all(|(s, t)| {
        let (fs, ft) = (f.0[s], f.0[t]);
        if g.is_accepting(s) {
            fs > ft
        } else {
            fs >= ft
        }
    }))
}

/// Strongly connected components in Tarjan completion order: every edge
/// between distinct components goes from a later to an earlier component.
///
/// Returns `(component_of_node, component_count)`.
pub fn strongly_connected_components(g: &FiniteGraph) -> (Vec<usize>, usize) {
    const UNVISITED: usize = usize::MAX;
    let n = g.len();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNVISITED; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut count = 0usize;
    // (node, next successor position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (component, count)
}

/// Whether the node set of each component contains a cycle (size > 1 or a
/// self-loop).
fn nontrivial_components(g: &FiniteGraph, component: &[usize], count: usize) -> Vec<bool> {
    let mut size = vec![0usize; count];
    for &c in component {
        size[c] += 1;
    }
    let mut nontrivial: Vec<bool> = size.iter().map(|&s| s > 1).collect();
    for (s, t) in g.edges() {
        if s == t {
            nontrivial[component[s]] = true;
        }
    }
    nontrivial
}

pub fn has_accepting_cycle(g: &FiniteGraph) -> bool {
    accepting_cycle_node(g).is_some()
}

/// Some accepting node lying on a cycle, if any.
pub fn accepting_cycle_node(g: &FiniteGraph) -> Option<usize> {
    let (component, count) = strongly_connected_components(g);
    let nontrivial = nontrivial_components(g, &component, count);
    (0..g.len()).find(|&s| g.is_accepting(s) && nontrivial[component[s]])
}

/// Numbers each node by the position of its SCC in a reverse topological
/// order of the condensation (sinks get 0).
pub fn scc_numbering(g: &FiniteGraph) -> Numbering {
    let (component, _) = strongly_connected_components(g);
    Numbering(component.into_iter().map(|c| c as u64).collect())
}

/// `f(s)` = number of accepting nodes reachable from `s` (including `s`).
pub fn count_reachable_accepting(g: &FiniteGraph) -> Numbering {
    let n = g.len();
    let mut seen = vec![usize::MAX; n];
    let mut queue = Vec::new();
    let values = (0..n)
        .map(|start| {
            let mut count = 0u64;
            queue.clear();
            queue.push(start);
            seen[start] = start;
            while let Some(s) = queue.pop() {
                if g.is_accepting(s) {
                    count += 1;
                }
                for &t in g.successors(s) {
                    if seen[t] != start {
                        seen[t] = start;
                        queue.push(t);
                    }
                }
            }
            count
        })
        .collect();
    Numbering(values)
}
