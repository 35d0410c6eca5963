//! The three-location automaton with a clock `x` used throughout the
//! tests and docs, together with certificates for it.
//!
//! ```text
//!   q0 --------------> q1 (accepting)
//!   q0 --x >= 1------> q1
//!   q1 --x < 2, x:=0-> q2
//!   q2 --x >= 2------> q1
//! ```

use crate::certifier::{Certificate, CertificateEntry};
use crate::dbm::Dbm;
use crate::model::{parse_model, Atom, CmpOp, LocationId, TimedAutomaton};
use crate::zone_graph::SubsumptionMode;

pub const DEMO: &str = "\
clock x
location q0 initial
location q1 accepting
location q2
edge q0 -> q1
edge q0 -> q1 guard: x >= 1
edge q1 -> q2 guard: x < 2 reset: x
edge q2 -> q1 guard: x >= 2
";

pub fn demo() -> TimedAutomaton {
    parse_model(DEMO).expect("fixture model parses")
}

/// One-clock zone `x >= c`.
pub fn ge(c: u32) -> Dbm {
    Dbm::universe(1)
        .constrain(&[Atom::new(0, CmpOp::Ge, c)])
        .expect("one clock")
}

/// Valid certificate: every node of the zone graph, numbered so that the
/// accepting `q1` entries strictly decrease.
pub fn demo_certificate() -> Certificate {
    let e = |loc, c, n| CertificateEntry::new(LocationId(loc), ge(c), n);
    Certificate::new(
        SubsumptionMode::Inclusion,
        vec![e(0, 0, 3), e(1, 0, 2), e(1, 1, 2), e(2, 0, 1), e(1, 2, 0)],
    )
}

/// Same entries with a uniform numbering. The `q2 -> q1` successor
/// `(q1, x >= 2)` is also covered by `(q1, x >= 0)`, which closes the
/// spurious accepting cycle; the checker rejects it.
pub fn demo_uniform_certificate() -> Certificate {
    let mut c = demo_certificate();
    for e in &mut c.entries {
        e.numbering = 0;
    }
    c
}
