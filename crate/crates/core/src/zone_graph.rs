//! Symbolic semantics over `(location, zone)` pairs.
//!
//! Nodes are stored delay-closed: the initial node is the delay closure
//! of `{0}` inside the initial invariant, and a successor applies guard,
//! resets and target invariant, then lets time elapse within the target
//! invariant. The source zone is itself delay-closed within its invariant
//! first, which is the identity on nodes produced here and keeps the
//! operator sound on arbitrary zones read from certificates.

use std::fmt;
use std::str::FromStr;

use crate::dbm::{Dbm, LuBounds};
use crate::model::{LocationId, TimedAutomaton};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicState {
    pub location: LocationId,
    pub zone: Dbm,
}

impl SymbolicState {
    pub fn new(location: LocationId, zone: Dbm) -> Self {
        Self { location, zone }
    }
}

/// How one symbolic state may stand in for another at the same location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SubsumptionMode {
    /// Plain zone inclusion `Z ⊆ Z'`.
    #[default]
    Inclusion,
    /// `Z ⊆ α_≼LU(Z')` with the model's LU bounds.
    AlphaLu,
}

impl SubsumptionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SubsumptionMode::Inclusion => "inclusion",
            SubsumptionMode::AlphaLu => "alpha-lu",
        }
    }
}

impl fmt::Display for SubsumptionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubsumptionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inclusion" => Ok(SubsumptionMode::Inclusion),
            "alpha-lu" => Ok(SubsumptionMode::AlphaLu),
            other => Err(format!(
                "unknown mode `{other}` (expected inclusion or alpha-lu)"
            )),
        }
    }
}

/// Covering test for zones of equal dimension.
#[derive(Debug, Clone)]
pub struct Cover {
    mode: SubsumptionMode,
    lu: LuBounds,
}

impl Cover {
    pub fn new(mode: SubsumptionMode, lu: LuBounds) -> Self {
        Self { mode, lu }
    }

    /// Cover with the model's own LU bounds.
    pub fn for_model(ta: &TimedAutomaton, mode: SubsumptionMode) -> Self {
        Self::new(mode, crate::model::compute_lu(ta))
    }

    pub fn mode(&self) -> SubsumptionMode {
        self.mode
    }

    pub fn lu(&self) -> &LuBounds {
        &self.lu
    }

    /// Whether `small` is covered by `big`. Both canonical, non-empty.
    #[inline]
    pub fn covers(&self, small: &Dbm, big: &Dbm) -> bool {
        match self.mode {
            SubsumptionMode::Inclusion => small.le_entrywise(big),
            SubsumptionMode::AlphaLu => small.le_entrywise(big) || small.alpha_lu_le(big, &self.lu),
        }
    }

    pub fn covers_state(&self, small: &SymbolicState, big: &SymbolicState) -> bool {
        small.location == big.location && self.covers(&small.zone, &big.zone)
    }
}

fn constrain(z: &Dbm, atoms: &[crate::model::Atom]) -> Dbm {
    z.constrain(atoms)
        .expect("automaton atoms refer to declared clocks")
}

pub fn initial_state(ta: &TimedAutomaton) -> SymbolicState {
    let inv = ta.invariant(ta.initial());
    let zone = constrain(&constrain(&Dbm::zero(ta.clock_count()), inv).up(), inv);
    debug_assert!(!zone.is_empty(), "model validation guarantees 0 ∈ I(q0)");
    SymbolicState::new(ta.initial(), zone)
}

/// Successor along one edge, `None` if disabled.
pub fn successor_along(ta: &TimedAutomaton, from: &Dbm, edge: usize) -> Option<Dbm> {
    let e = &ta.edges()[edge];
    let target_inv = ta.invariant(e.target);
    let guarded = constrain(from, &e.guard);
    if guarded.is_empty() {
        return None;
    }
    let reset = guarded
        .reset(&e.resets)
        .expect("automaton resets refer to declared clocks");
    let entered = constrain(&reset, target_inv);
    if entered.is_empty() {
        return None;
    }
    Some(constrain(&entered.up(), target_inv))
}

/// Source zone after letting time elapse inside the location invariant.
fn delayed_source(ta: &TimedAutomaton, s: &SymbolicState) -> Dbm {
    constrain(&s.zone.up(), ta.invariant(s.location))
}

pub fn successors(ta: &TimedAutomaton, s: &SymbolicState) -> Vec<(usize, SymbolicState)> {
    let start = delayed_source(ta, s);
    if start.is_empty() {
        return Vec::new();
    }
    ta.outgoing(s.location)
        .filter_map(|(idx, e)| {
            successor_along(ta, &start, idx).map(|z| (idx, SymbolicState::new(e.target, z)))
        })
        .collect()
}

pub fn successors_abstracted(
    ta: &TimedAutomaton,
    lu: &LuBounds,
    s: &SymbolicState,
) -> Vec<(usize, SymbolicState)> {
    successors(ta, s)
        .into_iter()
        .map(|(idx, mut succ)| {
            succ.zone = succ
                .zone
                .extra_lu_plus(lu)
                .expect("LU bounds computed for this automaton");
            (idx, succ)
        })
        .collect()
}

/// Initial state of the abstracted zone graph.
pub fn initial_state_abstracted(ta: &TimedAutomaton, lu: &LuBounds) -> SymbolicState {
    let mut s = initial_state(ta);
    s.zone = s
        .zone
        .extra_lu_plus(lu)
        .expect("LU bounds computed for this automaton");
    s
}
