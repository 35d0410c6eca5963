//! Seeded model generators: small random automata for differential
//! testing and a scalable ring family for throughput measurements.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Atom, CmpOp, Edge, Location, LocationId, TimedAutomaton};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomParams {
    pub max_clocks: usize,
    pub max_locations: usize,
    pub max_constant: u32,
    pub max_out_degree: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            max_clocks: 3,
            max_locations: 6,
            max_constant: 5,
            max_out_degree: 4,
        }
    }
}

const OPS: [CmpOp; 5] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];

fn random_atom(rng: &mut impl Rng, clocks: usize, max_constant: u32) -> Atom {
    Atom::new(
        rng.gen_range(0..clocks),
        OPS[rng.gen_range(0..OPS.len())],
        rng.gen_range(0..=max_constant),
    )
}

/// Random automaton with 1 to `max_clocks` clocks, 1 to `max_locations`
/// locations and invariants made of upper bounds only. Location 0 is
/// initial.
pub fn random_automaton(rng: &mut impl Rng, p: &RandomParams) -> TimedAutomaton {
    let clocks = rng.gen_range(1..=p.max_clocks);
    let n = rng.gen_range(1..=p.max_locations);
    let locations = (0..n)
        .map(|k| {
            let invariant = if k > 0 && rng.gen_bool(0.3) {
                let c = rng.gen_range(1..=p.max_constant.max(1));
                let op = if rng.gen_bool(0.5) {
                    CmpOp::Le
                } else {
                    CmpOp::Lt
                };
                vec![Atom::new(rng.gen_range(0..clocks), op, c)]
            } else {
                Vec::new()
            };
            Location {
                name: format!("q{k}"),
                accepting: rng.gen_bool(0.4),
                invariant,
            }
        })
        .collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..=p.max_out_degree) {
            let guard = (0..rng.gen_range(0..=2))
                .map(|_| random_atom(rng, clocks, p.max_constant))
                .collect();
            let resets = (0..clocks).filter(|_| rng.gen_bool(0.35)).collect();
            edges.push(Edge {
                source: LocationId(s),
                guard,
                resets,
                target: LocationId(rng.gen_range(0..n)),
            });
        }
    }
    let names = (0..clocks).map(|c| format!("x{c}")).collect();
    TimedAutomaton::new(names, locations, LocationId(0), edges)
        .expect("generated automata are well formed")
}

/// Deterministic stream of random automata.
pub fn random_automata(seed: u64, count: usize, p: RandomParams) -> Vec<TimedAutomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_automaton(&mut rng, &p)).collect()
}

/// A ring of `len` non-accepting locations over three clocks. Location
/// `p_i` waits for `x_{i mod 3} >= 1 + i mod 3` and resets that clock;
/// every third location also branches into an accepting location `a_i`
/// that leads to a non-accepting sink. The Büchi language is empty and the
/// number of reachable zones grows linearly with `len`.
pub fn ring(len: usize) -> TimedAutomaton {
    assert!(len > 0, "ring needs at least one location");
    let clocks = 3;
    let mut locations: Vec<Location> = (0..len)
        .map(|i| Location {
            name: format!("p{i}"),
            accepting: false,
            invariant: vec![Atom::new(i % clocks, CmpOp::Le, 4)],
        })
        .collect();
    let sink = LocationId(locations.len());
    locations.push(Location {
        name: "sink".into(),
        accepting: false,
        invariant: Vec::new(),
    });
    let mut edges = vec![Edge {
        source: sink,
        guard: Vec::new(),
        resets: vec![0],
        target: sink,
    }];
    for i in 0..len {
        let c = i % clocks;
        let next = LocationId((i + 1) % len);
        edges.push(Edge {
            source: LocationId(i),
            guard: vec![Atom::new(c, CmpOp::Ge, 1 + (i % 3) as u32)],
            resets: vec![c],
            target: next,
        });
        if i % 3 == 0 {
            let a = LocationId(locations.len());
            locations.push(Location {
                name: format!("a{i}"),
                accepting: true,
                invariant: Vec::new(),
            });
            edges.push(Edge {
                source: LocationId(i),
                guard: vec![Atom::new((c + 1) % clocks, CmpOp::Gt, 2)],
                resets: Vec::new(),
                target: a,
            });
            edges.push(Edge {
                source: a,
                guard: vec![Atom::new((c + 2) % clocks, CmpOp::Lt, 3)],
                resets: vec![(c + 2) % clocks],
                target: sink,
            });
        }
    }
    // keep the initial invariant satisfiable: p0 bounds x0 by 4
    let names = (0..clocks).map(|c| format!("x{c}")).collect();
    TimedAutomaton::new(names, locations, LocationId(0), edges).expect("ring is well formed")
}
