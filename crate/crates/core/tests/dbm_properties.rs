//! DBM operations against the valuation-level oracle.

mod common;

use common::{arb_constraints, arb_lu, arb_zone, arb_zone_pair, build, grid_for};
use proptest::prelude::*;
use tbacert_core::dbm::Dbm;
use tbacert_core::model::{Atom, CmpOp};
use tbacert_core::oracle::semantics::{lu_simulated, ConstraintZone};

const C: i64 = 3;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: std::env::var("PROPTEST_CASES")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(1000),
        max_global_rejects: 100_000,
        ..ProptestConfig::default()
    }
}

fn agree_on_grid(dbm: &Dbm, expected: impl Fn(&[num_rational::Rational64]) -> bool) {
    for v in grid_for(dbm.clocks(), C) {
        assert_eq!(dbm.contains(v), expected(v), "at {v:?} in {dbm:?}");
    }
}

fn arb_atoms(clocks: usize) -> impl Strategy<Value = Vec<Atom>> {
    let op = prop_oneof![
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Eq),
        Just(CmpOp::Ge),
        Just(CmpOp::Gt)
    ];
    prop::collection::vec(
        (0..clocks, op, 0..=C as u32).prop_map(|(c, op, k)| Atom::new(c, op, k)),
        0..=3,
    )
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn canonicalize_is_sound_and_idempotent((oracle, z) in arb_zone(3, C)) {
        prop_assert_eq!(z.is_empty(), oracle.is_empty());
        if !z.is_empty() {
            prop_assert!(z.is_canonical());
            prop_assert_eq!(&z.canonical(), &z);
            agree_on_grid(&z, |v| oracle.contains(v));
        }
    }

    #[test]
    fn tighten_matches_full_closure(
        (n, raw) in (1usize..=3).prop_flat_map(|n| (Just(n), arb_constraints(n, C, 5)))
    ) {
        let (_, closed) = build(n, &raw);
        let mut inc = Dbm::universe(n);
        for &(i, j, c, s) in &raw {
            let b = if s { tbacert_core::Bound::lt(c) } else { tbacert_core::Bound::le(c) };
            inc.tighten(i, j, b);
        }
        prop_assert_eq!(inc.is_empty(), closed.is_empty());
        if !closed.is_empty() {
            prop_assert_eq!(inc, closed);
        }
    }

    #[test]
    fn inclusion_is_semantic(((o1, z1), (o2, z2)) in arb_zone_pair(3, C)) {
        prop_assume!(!z1.is_empty() && !z2.is_empty());
        let inc = z1.is_included_in(&z2).unwrap();
        prop_assert_eq!(inc, o1.is_subset_of(&o2));
        prop_assert!(z1.is_included_in(&z1).unwrap());
        if inc && z2.is_included_in(&z1).unwrap() {
            prop_assert_eq!(&z1, &z2);
        }
        // transitivity through the intersection
        let both = ConstraintZone::new(
            o1.clocks,
            o1.constraints.iter().chain(&o2.constraints).copied().collect(),
        );
        let (_, meet) = build(o1.clocks, &both.constraints.iter()
            .map(|c| (c.i, c.j, *c.c.numer(), c.strict)).collect::<Vec<_>>());
        if !meet.is_empty() {
            prop_assert!(meet.is_included_in(&z1).unwrap());
            prop_assert!(meet.is_included_in(&z2).unwrap());
            if inc {
                prop_assert!(meet.is_included_in(&z2).unwrap());
            }
        }
    }

    #[test]
    fn up_matches_delay_semantics((oracle, z) in arb_zone(3, C)) {
        prop_assume!(!z.is_empty());
        let up = z.up();
        prop_assert!(up.is_canonical());
        prop_assert!(z.is_included_in(&up).unwrap());
        agree_on_grid(&up, |v| oracle.up_contains(v));
    }

    #[test]
    fn reset_matches_semantics(
        ((oracle, z), mask) in arb_zone(3, C).prop_flat_map(|zone| {
            let n = zone.1.clocks();
            (Just(zone), prop::collection::vec(any::<bool>(), n))
        })
    ) {
        prop_assume!(!z.is_empty());
        let resets: Vec<usize> = (0..mask.len()).filter(|&k| mask[k]).collect();
        let r = z.reset(&resets).unwrap();
        prop_assert!(r.is_canonical());
        agree_on_grid(&r, |v| oracle.reset_contains(v, &resets));
    }

    #[test]
    fn constrain_matches_semantics(
        ((oracle, z), atoms) in arb_zone(3, C).prop_flat_map(|zone| {
            let n = zone.1.clocks();
            (Just(zone), arb_atoms(n))
        })
    ) {
        prop_assume!(!z.is_empty());
        let g = z.constrain(&atoms).unwrap();
        let holds = |v: &[num_rational::Rational64]| {
            tbacert_core::oracle::satisfies(&atoms, v)
        };
        let mut both = oracle.clone();
        for a in &atoms {
            let x = a.clock + 1;
            let k = i64::from(a.constant);
            use tbacert_core::oracle::semantics::Constraint as K;
            match a.op {
                CmpOp::Lt => both.constraints.push(K::new(x, 0, k, true)),
                CmpOp::Le => both.constraints.push(K::new(x, 0, k, false)),
                CmpOp::Gt => both.constraints.push(K::new(0, x, -k, true)),
                CmpOp::Ge => both.constraints.push(K::new(0, x, -k, false)),
                CmpOp::Eq => {
                    both.constraints.push(K::new(x, 0, k, false));
                    both.constraints.push(K::new(0, x, -k, false));
                }
            }
        }
        prop_assert_eq!(g.is_empty(), both.is_empty());
        if !g.is_empty() {
            prop_assert!(g.is_canonical());
            agree_on_grid(&g, |v| oracle.contains(v) && holds(v));
        }
    }

    #[test]
    fn extrapolation_grows_and_is_idempotent(
        ((oracle, z), lu) in arb_zone(3, C).prop_flat_map(|zone| {
            let n = zone.1.clocks();
            (Just(zone), arb_lu(n, C))
        })
    ) {
        prop_assume!(!z.is_empty());
        let e = z.extra_lu_plus(&lu).unwrap();
        prop_assert!(e.is_canonical());
        prop_assert!(z.is_included_in(&e).unwrap());
        prop_assert_eq!(&e.extra_lu_plus(&lu).unwrap(), &e);
        // every added valuation is simulated by one already in the zone
        for v in grid_for(z.clocks(), C) {
            if e.contains(v) {
                prop_assert!(oracle.lu_simulates_some(v, &lu), "{:?} in {:?}", v, e);
            }
        }
    }

    #[test]
    fn alpha_subsumption_matches_grid(
        (((o1, z1), (o2, z2)), lu) in arb_zone_pair(2, 4).prop_flat_map(|pair| {
            let n = pair.0 .1.clocks();
            (Just(pair), arb_lu(n, 4))
        })
    ) {
        prop_assume!(!z1.is_empty() && !z2.is_empty());
        let fast = z1.is_alpha_lu_subsumed_by(&z2, &lu).unwrap();
        let witness = grid_for(z1.clocks(), 4)
            .iter()
            .find(|v| o1.contains(v) && !o2.lu_simulates_some(v, &lu));
        prop_assert_eq!(fast, witness.is_none(), "witness {:?}", witness);
        if z1.is_included_in(&z2).unwrap() {
            prop_assert!(fast);
        }
    }
}

#[test]
fn simulation_relation_is_a_preorder() {
    let lu = tbacert_core::LuBounds::new(vec![Some(1), None], vec![Some(2), Some(0)]);
    let pts = common::grid(2, 3);
    for a in pts.iter().step_by(7) {
        assert!(lu_simulated(a, a, &lu));
        for b in pts.iter().step_by(11) {
            for c in pts.iter().step_by(13) {
                if lu_simulated(a, b, &lu) && lu_simulated(b, c, &lu) {
                    assert!(lu_simulated(a, c, &lu), "{a:?} {b:?} {c:?}");
                }
            }
        }
    }
}
