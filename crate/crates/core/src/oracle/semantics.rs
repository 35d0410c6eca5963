//! Valuation-level ground truth for zone operations.
//!
//! Zones are given as plain lists of difference constraints and every
//! question is answered on exact rationals: membership directly, and
//! existential questions (is `v` a delay successor / a reset image / LU
//! simulated by a point of the zone?) by a Bellman-Ford feasibility test
//! over the remaining unknowns. Nothing here goes through [`Dbm`]
//! operations, so the two can be compared.

use num_rational::Rational64;

use crate::dbm::{Bound, Dbm, LuBounds};

/// `x_i - x_j < c` (strict) or `≤ c`, with `x_0 = 0` and clocks at
/// `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub c: Rational64,
    pub strict: bool,
}

impl Constraint {
    pub fn new(i: usize, j: usize, c: i64, strict: bool) -> Self {
        Self {
            i,
            j,
            c: Rational64::from_integer(c),
            strict,
        }
    }

    fn holds(&self, d: Rational64) -> bool {
        if self.strict {
            d < self.c
        } else {
            d <= self.c
        }
    }

    /// The complement `x_j - x_i ≺' -c`.
    pub fn negated(&self) -> Self {
        Self {
            i: self.j,
            j: self.i,
            c: -self.c,
            strict: !self.strict,
        }
    }
}

/// `x_a - x_b ≺ w` over unknowns `0..nodes`; feasibility by Bellman-Ford
/// with strictness carried as an infinitesimal.
fn feasible(nodes: usize, edges: &[Constraint]) -> bool {
    // weight of edge b -> a is (c, -1 if strict)
    let zero = (Rational64::from_integer(0), 0i64);
    let mut dist = vec![zero; nodes];
    for round in 0..=nodes {
        let mut changed = false;
        for e in edges {
            let cand = (dist[e.j].0 + e.c, dist[e.j].1 - i64::from(e.strict));
            if cand < dist[e.i] {
                dist[e.i] = cand;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
        if round == nodes {
            return false;
        }
    }
    unreachable!()
}

/// A zone as a conjunction of difference constraints over `clocks` clocks
/// (plus the implicit `x ≥ 0` for every clock).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintZone {
    pub clocks: usize,
    pub constraints: Vec<Constraint>,
}

fn nonneg(clocks: usize) -> impl Iterator<Item = Constraint> {
    (1..=clocks).map(|x| Constraint::new(0, x, 0, false))
}

impl ConstraintZone {
    pub fn new(clocks: usize, constraints: Vec<Constraint>) -> Self {
        for c in &constraints {
            assert!(c.i <= clocks && c.j <= clocks, "constraint out of range");
        }
        Self {
            clocks,
            constraints,
        }
    }

    /// Reads every finite entry of a matrix as a constraint.
    pub fn from_dbm(z: &Dbm) -> Self {
        let size = z.size();
        let mut constraints = Vec::new();
        for i in 0..size {
            for j in 0..size {
                let b: Bound = z.get(i, j);
                if let Some(c) = b.value() {
                    constraints.push(Constraint::new(i, j, c, b.is_strict()));
                }
            }
        }
        Self::new(z.clocks(), constraints)
    }

    pub fn with(&self, extra: Constraint) -> Self {
        let mut z = self.clone();
        z.constraints.push(extra);
        z
    }

    fn all_constraints(&self) -> Vec<Constraint> {
        self.constraints
            .iter()
            .copied()
            .chain(nonneg(self.clocks))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !feasible(self.clocks + 1, &self.all_constraints())
    }

    pub fn contains(&self, v: &[Rational64]) -> bool {
        assert_eq!(v.len(), self.clocks);
        let at = |k: usize| {
            if k == 0 {
                Rational64::from_integer(0)
            } else {
                v[k - 1]
            }
        };
        v.iter().all(|x| *x >= Rational64::from_integer(0))
            && self.constraints.iter().all(|c| c.holds(at(c.i) - at(c.j)))
    }

    /// Semantic inclusion: no point of `self` violates a constraint of
    /// `other`.
    pub fn is_subset_of(&self, other: &ConstraintZone) -> bool {
        if self.is_empty() {
            return true;
        }
        other
            .constraints
            .iter()
            .all(|c| self.with(c.negated()).is_empty())
    }

    /// `v ∈ up(self)`: some `δ ≥ 0` has `v - δ ∈ self`.
    pub fn up_contains(&self, v: &[Rational64]) -> bool {
        let zero = Rational64::from_integer(0);
        if v.iter().any(|x| *x < zero) {
            return false;
        }
        let at = |k: usize| if k == 0 { zero } else { v[k - 1] };
        // unknowns: 0 (reference), 1 (δ)
        let mut edges = vec![Constraint::new(0, 1, 0, false)];
        for k in 1..=self.clocks {
            // v_k - δ ≥ 0
            edges.push(Constraint {
                i: 1,
                j: 0,
                c: v[k - 1],
                strict: false,
            });
        }
        for c in &self.constraints {
            match (c.i == 0, c.j == 0) {
                (false, false) | (true, true) => {
                    if !c.holds(at(c.i) - at(c.j)) {
                        return false;
                    }
                }
                // v_i - δ ≺ c  ⇔  0 - δ ≺ c - v_i
                (false, true) => edges.push(Constraint {
                    i: 0,
                    j: 1,
                    c: c.c - at(c.i),
                    strict: c.strict,
                }),
                // δ - v_j ≺ c
                (true, false) => edges.push(Constraint {
                    i: 1,
                    j: 0,
                    c: c.c + at(c.j),
                    strict: c.strict,
                }),
            }
        }
        feasible(2, &edges)
    }

    /// `v ∈ self[R := 0]` for 0-based clocks `resets`.
    pub fn reset_contains(&self, v: &[Rational64], resets: &[usize]) -> bool {
        let zero = Rational64::from_integer(0);
        if v.iter().any(|x| *x < zero) || resets.iter().any(|&r| v[r] != zero) {
            return false;
        }
        // unknown index of each matrix index, if reset
        let mut var = vec![None; self.clocks + 1];
        let mut nodes = 1;
        for &r in resets {
            if var[r + 1].is_none() {
                var[r + 1] = Some(nodes);
                nodes += 1;
            }
        }
        let fixed = |k: usize| if k == 0 { zero } else { v[k - 1] };
        let mut edges: Vec<Constraint> = (1..nodes)
            .map(|u| Constraint::new(0, u, 0, false))
            .collect();
        for c in &self.constraints {
            match (var[c.i], var[c.j]) {
                (None, None) => {
                    if !c.holds(fixed(c.i) - fixed(c.j)) {
                        return false;
                    }
                }
                (Some(a), None) => edges.push(Constraint {
                    i: a,
                    j: 0,
                    c: c.c + fixed(c.j),
                    strict: c.strict,
                }),
                (None, Some(b)) => edges.push(Constraint {
                    i: 0,
                    j: b,
                    c: c.c - fixed(c.i),
                    strict: c.strict,
                }),
                (Some(a), Some(b)) => edges.push(Constraint {
                    i: a,
                    j: b,
                    c: c.c,
                    strict: c.strict,
                }),
            }
        }
        feasible(nodes, &edges)
    }

    /// Some `v' ∈ self` with `v ≼LU v'`.
    pub fn lu_simulates_some(&self, v: &[Rational64], lu: &LuBounds) -> bool {
        let mut edges = self.all_constraints();
        for (k, &vx) in v.iter().enumerate() {
            let x = k + 1;
            let (lo, lo_strict) = match lu.lower[k] {
                None => (Rational64::from_integer(0), false),
                Some(l) if Rational64::from_integer(l) < vx => (Rational64::from_integer(l), true),
                Some(_) => (vx, false),
            };
            // x ≥ lo / x > lo
            edges.push(Constraint {
                i: 0,
                j: x,
                c: -lo,
                strict: lo_strict,
            });
            let unbounded_above = match lu.upper[k] {
                None => true,
                Some(u) => vx > Rational64::from_integer(u),
            };
            if !unbounded_above {
                edges.push(Constraint {
                    i: x,
                    j: 0,
                    c: vx,
                    strict: false,
                });
            }
        }
        feasible(self.clocks + 1, &edges)
    }
}

/// `v ≼LU v'`: for every clock, `v'(x) < v(x)` only above `L(x)` and
/// `v'(x) > v(x)` only when `v(x)` is above `U(x)`.
pub fn lu_simulated(v: &[Rational64], w: &[Rational64], lu: &LuBounds) -> bool {
    v.iter().zip(w).enumerate().all(|(k, (&a, &b))| {
        let above = |bound: Option<i64>, x: Rational64| match bound {
            None => true,
            Some(c) => x > Rational64::from_integer(c),
        };
        (b >= a || above(lu.lower[k], b)) && (b <= a || above(lu.upper[k], a))
    })
}
