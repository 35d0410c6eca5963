//! Numbering theory on random finite graphs, against brute force.

use proptest::prelude::*;
use tbacert_core::theory::{
    check_topological_numbering, count_reachable_accepting, has_accepting_cycle, scc_numbering,
    strongly_connected_components, FiniteGraph, Numbering,
};

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = FiniteGraph> {
    (1..=max_nodes).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::bool::weighted(0.3), n),
            prop::collection::vec((0..n, 0..n), 0..=2 * n),
        )
            .prop_map(|(acc, edges)| FiniteGraph::from_edges(acc, edges).unwrap())
    })
}

/// Reachability by repeated relaxation; `reach[s][t]` iff a path of at
/// least one edge leads from `s` to `t`.
#[allow(clippy::needless_range_loop)]
fn closure(g: &FiniteGraph) -> Vec<Vec<bool>> {
    let n = g.len();
    let mut r = vec![vec![false; n]; n];
    for (s, t) in g.edges() {
        r[s][t] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn brute_force_accepting_cycle(g: &FiniteGraph) -> bool {
    let r = closure(g);
    (0..g.len()).any(|s| g.is_accepting(s) && r[s][s])
}

/// Exhaustive search for a topological numbering with values below `n`.
fn brute_force_numbering_exists(g: &FiniteGraph) -> bool {
    let n = g.len();
    let mut f = vec![0u64; n];
    loop {
        if check_topological_numbering(g, &Numbering(f.clone())).unwrap() {
            return true;
        }
        let mut k = 0;
        loop {
            if k == n {
                return false;
            }
            f[k] += 1;
            if f[k] < n as u64 {
                break;
            }
            f[k] = 0;
            k += 1;
        }
    }
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn scc_numbering_valid_iff_no_accepting_cycle(g in arb_graph(12)) {
        let cyclic = brute_force_accepting_cycle(&g);
        prop_assert_eq!(has_accepting_cycle(&g), cyclic);
        let f = scc_numbering(&g);
        prop_assert_eq!(check_topological_numbering(&g, &f).unwrap(), !cyclic);
    }

    #[test]
    fn reachable_accepting_count_is_valid_without_accepting_cycles(g in arb_graph(12)) {
        prop_assume!(!brute_force_accepting_cycle(&g));
        prop_assert!(check_topological_numbering(&g, &count_reachable_accepting(&g)).unwrap());
    }

    #[test]
    fn components_are_mutual_reachability(g in arb_graph(12)) {
        let (comp, count) = strongly_connected_components(&g);
        let r = closure(&g);
        for s in 0..g.len() {
            prop_assert!(comp[s] < count);
            for t in 0..g.len() {
                let same = s == t || (r[s][t] && r[t][s]);
                prop_assert_eq!(comp[s] == comp[t], same);
                if r[s][t] && comp[s] != comp[t] {
                    prop_assert!(comp[s] > comp[t]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn numbering_exists_iff_no_accepting_cycle(g in arb_graph(5)) {
        prop_assert_eq!(brute_force_numbering_exists(&g), !brute_force_accepting_cycle(&g));
    }
}
