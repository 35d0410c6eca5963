#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_rational::Rational64;
use proptest::prelude::*;
use tbacert_core::dbm::{Bound, Dbm, LuBounds};
use tbacert_core::oracle::semantics::{Constraint, ConstraintZone};

/// Raw constraint tuples `(i, j, c, strict)`.
pub fn arb_constraints(
    clocks: usize,
    max_const: i64,
    max_len: usize,
) -> impl Strategy<Value = Vec<(usize, usize, i64, bool)>> {
    prop::collection::vec(
        (0..=clocks, 0..clocks, -max_const..=max_const, any::<bool>())
            .prop_map(move |(i, k, c, s)| (i, (i + 1 + k) % (clocks + 1), c, s)),
        0..=max_len,
    )
}

/// A zone both as constraints and as a canonical DBM built with `set`.
pub fn build(clocks: usize, raw: &[(usize, usize, i64, bool)]) -> (ConstraintZone, Dbm) {
    let constraints = raw
        .iter()
        .map(|&(i, j, c, s)| Constraint::new(i, j, c, s))
        .collect();
    let mut z = Dbm::universe(clocks);
    for &(i, j, c, s) in raw {
        let b = if s { Bound::lt(c) } else { Bound::le(c) };
        if b < z.get(i, j) {
            z.set(i, j, b);
        }
    }
    z.canonicalize();
    (ConstraintZone::new(clocks, constraints), z)
}

pub fn arb_zone(max_clocks: usize, max_const: i64) -> impl Strategy<Value = (ConstraintZone, Dbm)> {
    (1..=max_clocks).prop_flat_map(move |n| {
        arb_constraints(n, max_const, 5).prop_map(move |raw| build(n, &raw))
    })
}

pub fn arb_zone_pair(
    max_clocks: usize,
    max_const: i64,
) -> impl Strategy<Value = ((ConstraintZone, Dbm), (ConstraintZone, Dbm))> {
    (1..=max_clocks).prop_flat_map(move |n| {
        (
            arb_constraints(n, max_const, 4).prop_map(move |raw| build(n, &raw)),
            arb_constraints(n, max_const, 4).prop_map(move |raw| build(n, &raw)),
        )
    })
}

pub fn arb_lu(clocks: usize, max_const: i64) -> impl Strategy<Value = LuBounds> {
    let bound = prop::option::weighted(0.85, 0..=max_const);
    (
        prop::collection::vec(bound.clone(), clocks),
        prop::collection::vec(bound, clocks),
    )
        .prop_map(|(l, u)| LuBounds::new(l, u))
}

/// Every point with coordinates in `{0, 1/4, …, hi}`.
pub fn grid(clocks: usize, hi: i64) -> Vec<Vec<Rational64>> {
    let steps: Vec<Rational64> = (0..=4 * hi).map(|k| Rational64::new(k, 4)).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..clocks {
        out = out
            .into_iter()
            .flat_map(|p| {
                steps.iter().map(move |&s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out
}

/// Grid reaching past every constant combination for small dimensions,
/// kept to a few thousand points for three clocks.
pub fn grid_for(clocks: usize, max_const: i64) -> &'static [Vec<Rational64>] {
    type Cache = HashMap<(usize, i64), &'static [Vec<Rational64>]>;
    static CACHE: OnceLock<Mutex<Cache>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache.entry((clocks, max_const)).or_insert_with(|| {
        let hi = if clocks <= 2 {
            2 * max_const + 2
        } else {
            max_const + 1
        };
        Vec::leak(grid(clocks, hi))
    })
}

pub fn rat(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}
