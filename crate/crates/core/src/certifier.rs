//! Certificate checking for Büchi emptiness.
//!
//! A certificate is a finite set of `(location, zone, number)` triplets. It
//! is accepted when
//!
//! 1. every zone is non-empty and canonical,
//! 2. the initial node is covered by some entry at the initial location,
//! 3. for every entry `(q, Z, i)` and every successor `(q1, Z1)` of
//!    `(q, Z)` some entry `(q1, Z1', j)` covers `Z1` with `i ≥ j`, and
//!    `i > j` when `q` is accepting.
//!
//! Acceptance proves that the automaton has no Büchi run. Covering is plain
//! inclusion or, in `alpha-lu` mode, inclusion in the LU-simulation
//! abstraction of the covering zone. The checker never computes an
//! abstraction itself.
//!
//! Entries are checked independently; with several jobs the work is split
//! across a rayon pool and merged in entry order, so the verdict does not
//! depend on the schedule.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::dbm::Dbm;
use crate::model::{LocationId, TimedAutomaton};
use crate::theory::{accepting_cycle_node, scc_numbering, FiniteGraph};
use crate::zone_graph::{initial_state, successors, Cover, SubsumptionMode, SymbolicState};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CertificateEntry {
    pub location: LocationId,
    pub zone: Dbm,
    pub numbering: u64,
}

impl CertificateEntry {
    pub fn new(location: LocationId, zone: Dbm, numbering: u64) -> Self {
        Self {
            location,
            zone,
            numbering,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    pub mode: SubsumptionMode,
    pub entries: Vec<CertificateEntry>,
}

impl Certificate {
    pub fn new(mode: SubsumptionMode, entries: Vec<CertificateEntry>) -> Self {
        Self { mode, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("entry {entry}: zone over {found} clocks, model has {expected}")]
    DimensionMismatch {
        entry: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry {entry}: location #{location} does not exist in the model")]
    UnknownLocation { entry: usize, location: usize },
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error("entry {entry} lies on an accepting cycle of the cover graph; no numbering exists")]
    AcceptingCycle { entry: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Initial,
    Entry(usize),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Initial => f.write_str("initial"),
            Subject::Entry(i) => write!(f, "entry {i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectionReason {
    EmptyZone,
    NotCanonical,
    InitialUncovered,
    SuccessorUncovered,
    NumberingViolation,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::EmptyZone => "empty-zone",
            RejectionReason::NotCanonical => "not-canonical",
            RejectionReason::InitialUncovered => "initial-uncovered",
            RejectionReason::SuccessorUncovered => "successor-uncovered",
            RejectionReason::NumberingViolation => "numbering-violation",
        }
    }
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rejection {
    pub subject: Subject,
    pub reason: RejectionReason,
    /// Offending successor (with the edge index producing it), if any.
    pub witness: Option<(usize, SymbolicState)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Verdict {
    pub rejections: Vec<Rejection>,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.rejections.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Worker threads; `None` uses rayon's global pool.
    pub jobs: Option<usize>,
    /// Stop at the first rejection (first in entry order).
    pub fail_fast: bool,
}

/// Entries bucketed by location, each bucket in input order.
#[derive(Debug, Clone, Default)]
pub struct CertificateIndex {
    buckets: Vec<Vec<usize>>,
}

impl CertificateIndex {
    /// Entry indices stored at `loc`.
    pub fn at(&self, loc: LocationId) -> &[usize] {
        self.buckets.get(loc.0).map_or(&[], Vec::as_slice)
    }

    /// Number of non-empty buckets.
    pub fn locations(&self) -> usize {
        self.buckets.iter().filter(|b| !b.is_empty()).count()
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn build(c: &Certificate, keep: impl Fn(usize) -> bool) -> Self {
        let mut buckets: Vec<Vec<usize>> = Vec::new();
        for (k, e) in c.entries.iter().enumerate() {
            if !keep(k) {
                continue;
            }
            if buckets.len() <= e.location.0 {
                buckets.resize_with(e.location.0 + 1, Vec::new);
            }
            buckets[e.location.0].push(k);
        }
        Self { buckets }
    }
}

pub fn index_certificate(c: &Certificate) -> CertificateIndex {
    CertificateIndex::build(c, |_| true)
}

/// Local check of one (already screened) entry against the index.
pub fn check_entry(
    ta: &TimedAutomaton,
    cover: &Cover,
    c: &Certificate,
    index: &CertificateIndex,
    entry: usize,
) -> Vec<Rejection> {
    let e = &c.entries[entry];
    let accepting = ta.is_accepting(e.location);
    let i = e.numbering;
    let numbered_ok = |j: u64| if accepting { i > j } else { i >= j };

    let state = SymbolicState::new(e.location, e.zone.clone());
    let mut out = Vec::new();
    for (edge, succ) in successors(ta, &state) {
        let bucket = index.at(succ.location);
        let ok = bucket.iter().any(|&k| {
            let cand = &c.entries[k];
            numbered_ok(cand.numbering) && cover.covers(&succ.zone, &cand.zone)
        });
        if ok {
            continue;
        }
        let covered = bucket
            .iter()
            .any(|&k| cover.covers(&succ.zone, &c.entries[k].zone));
        out.push(Rejection {
            subject: Subject::Entry(entry),
            reason: if covered {
                RejectionReason::NumberingViolation
            } else {
                RejectionReason::SuccessorUncovered
            },
            witness: Some((edge, succ)),
        });
    }
    out
}

fn screen(e: &CertificateEntry) -> Option<RejectionReason> {
    if e.zone.is_empty() {
        Some(RejectionReason::EmptyZone)
    } else if !e.zone.is_canonical() {
        Some(RejectionReason::NotCanonical)
    } else {
        None
    }
}

fn validate_structure(ta: &TimedAutomaton, c: &Certificate) -> Result<(), CertificateError> {
    for (k, e) in c.entries.iter().enumerate() {
        if e.zone.clocks() != ta.clock_count() {
            return Err(CertificateError::DimensionMismatch {
                entry: k,
                expected: ta.clock_count(),
                found: e.zone.clocks(),
            });
        }
        if e.location.0 >= ta.locations().len() {
            return Err(CertificateError::UnknownLocation {
                entry: k,
                location: e.location.0,
            });
        }
    }
    Ok(())
}

pub fn check_certificate(
    ta: &TimedAutomaton,
    c: &Certificate,
) -> Result<Verdict, CertificateError> {
    check_certificate_with(ta, c, &CheckOptions::default())
}

pub fn check_certificate_with(
    ta: &TimedAutomaton,
    c: &Certificate,
    options: &CheckOptions,
) -> Result<Verdict, CertificateError> {
    validate_structure(ta, c)?;
    match options.jobs {
        None => Ok(run_checks(ta, c, options.fail_fast)),
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| CertificateError::Pool(e.to_string()))?;
            Ok(pool.install(|| run_checks(ta, c, options.fail_fast)))
        }
    }
}

fn run_checks(ta: &TimedAutomaton, c: &Certificate, fail_fast: bool) -> Verdict {
    let cover = Cover::for_model(ta, c.mode);
    let screened: Vec<Option<RejectionReason>> = c.entries.par_iter().map(screen).collect();
    let mut rejections: Vec<Rejection> = screened
        .iter()
        .enumerate()
        .filter_map(|(k, r)| {
            r.map(|reason| Rejection {
                subject: Subject::Entry(k),
                reason,
                witness: None,
            })
        })
        .collect();
    if fail_fast && !rejections.is_empty() {
        rejections.truncate(1);
        return Verdict { rejections };
    }

    let index = CertificateIndex::build(c, |k| screened[k].is_none());
    let init = initial_state(ta);
    let init_covered = index
        .at(init.location)
        .iter()
        .any(|&k| cover.covers(&init.zone, &c.entries[k].zone));
    if !init_covered {
        rejections.push(Rejection {
            subject: Subject::Initial,
            reason: RejectionReason::InitialUncovered,
            witness: None,
        });
        if fail_fast {
            return Verdict { rejections };
        }
    }

    let ok: Vec<usize> = (0..c.entries.len())
        .filter(|&k| screened[k].is_none())
        .collect();
    if fail_fast {
        if let Some(first) = ok
            .par_iter()
            .find_map_first(|&k| check_entry(ta, &cover, c, &index, k).into_iter().next())
        {
            rejections.push(first);
        }
    } else {
        let per_entry: Vec<Vec<Rejection>> = ok
            .par_iter()
            .map(|&k| check_entry(ta, &cover, c, &index, k))
            .collect();
        rejections.extend(per_entry.into_iter().flatten());
    }
    Verdict { rejections }
}

/// Graph over the entries with an edge from each entry to one covering
/// entry per successor. Among several covers the one with the smallest zone
/// (first in entry order on ties) is used, so that loose covers do not
/// close cycles that tighter ones avoid. Uncovered successors contribute
/// no edge.
pub fn cover_graph(ta: &TimedAutomaton, c: &Certificate) -> Result<FiniteGraph, CertificateError> {
    validate_structure(ta, c)?;
    let cover = Cover::for_model(ta, c.mode);
    let index = index_certificate(c);
    let targets: Vec<Vec<usize>> = c
        .entries
        .par_iter()
        .map(|e| {
            let state = SymbolicState::new(e.location, e.zone.clone());
            successors(ta, &state)
                .into_iter()
                .filter_map(|(_, succ)| {
                    let mut best: Option<usize> = None;
                    for &k in index.at(succ.location) {
                        let z = &c.entries[k].zone;
                        if !cover.covers(&succ.zone, z) {
                            continue;
                        }
                        match best {
                            Some(b) if !z.is_included_in(&c.entries[b].zone).unwrap_or(false) => {}
                            Some(b) if c.entries[b].zone == *z => {}
                            _ => best = Some(k),
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    let mut g = FiniteGraph::new(
        c.entries
            .iter()
            .map(|e| ta.is_accepting(e.location))
            .collect(),
    );
    for (u, ts) in targets.into_iter().enumerate() {
        for v in ts {
            g.add_edge(u, v).expect("entry indices are in range");
        }
    }
    Ok(g)
}

/// Replaces every numbering by the SCC numbering of [`cover_graph`].
/// Fails when that graph has an accepting cycle. Covering problems are left
/// for the checker to report.
pub fn renumber(ta: &TimedAutomaton, c: &Certificate) -> Result<Certificate, CertificateError> {
    let g = cover_graph(ta, c)?;
    if let Some(entry) = accepting_cycle_node(&g) {
        return Err(CertificateError::AcceptingCycle { entry });
    }
    let f = scc_numbering(&g);
    let mut out = c.clone();
    for (e, &n) in out.entries.iter_mut().zip(f.values()) {
        e.numbering = n;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dbm::Bound;
    use crate::fixtures::{demo, demo_certificate, ge};

    #[test]
    fn index_partitions_by_location() {
        let c = demo_certificate();
        let idx = index_certificate(&c);
        assert_eq!(idx.locations(), 3);
        assert_eq!(idx.at(LocationId(0)).len(), 1);
        assert_eq!(idx.at(LocationId(1)), &[1, 2, 4]);
        assert_eq!(idx.at(LocationId(2)).len(), 1);
        assert!(index_certificate(&Certificate::default()).is_empty());

        let mut dup = c.clone();
        dup.entries.push(dup.entries[1].clone());
        assert_eq!(index_certificate(&dup).at(LocationId(1)).len(), 4);
    }

    #[test]
    fn fixture_entries() {
        let ta = demo();
        let cover = Cover::for_model(&ta, SubsumptionMode::Inclusion);
        let c = demo_certificate();
        let idx = index_certificate(&c);
        // (q1, x ≥ 1, 2) -> (q2, x ≥ 0) covered by (q2, x ≥ 0, 1)
        assert!(check_entry(&ta, &cover, &c, &idx, 2).is_empty());
        // (q1, x ≥ 2, 0) has no enabled edge
        assert!(check_entry(&ta, &cover, &c, &idx, 4).is_empty());

        let cyc = Certificate::new(
            SubsumptionMode::Inclusion,
            vec![
                CertificateEntry::new(LocationId(1), ge(0), 0),
                CertificateEntry::new(LocationId(2), ge(0), 0),
            ],
        );
        let idx = index_certificate(&cyc);
        let rej = check_entry(&ta, &cover, &cyc, &idx, 0);
        assert_eq!(rej.len(), 1);
        assert_eq!(rej[0].reason, RejectionReason::NumberingViolation);
        assert_eq!(rej[0].witness.as_ref().unwrap().1.location, LocationId(2));
    }

    #[test]
    fn fixture_certificate_accepted() {
        let ta = demo();
        let v = check_certificate(&ta, &demo_certificate()).unwrap();
        assert!(v.accepted(), "{v:?}");
        let mut alpha = demo_certificate();
        alpha.mode = SubsumptionMode::AlphaLu;
        assert!(check_certificate(&ta, &alpha).unwrap().accepted());
    }

    #[test]
    fn zero_numbering_rejected() {
        let ta = demo();
        let mut c = demo_certificate();
        for e in &mut c.entries {
            e.numbering = 0;
        }
        let v = check_certificate(&ta, &c).unwrap();
        assert!(!v.accepted());
        assert!(v.rejections.iter().any(|r| r.reason == RejectionReason::NumberingViolation
            && matches!(r.subject, Subject::Entry(k) if ta.is_accepting(c.entries[k].location))));
    }

    #[test]
    fn renumbering_repairs_uniform_numbering() {
        let ta = demo();
        let c = crate::fixtures::demo_uniform_certificate();
        assert!(!check_certificate(&ta, &c).unwrap().accepted());
        let fixed = renumber(&ta, &c).unwrap();
        assert!(check_certificate(&ta, &fixed).unwrap().accepted());
        // only the numbering changes
        for (a, b) in c.entries.iter().zip(&fixed.entries) {
            assert_eq!((a.location, &a.zone), (b.location, &b.zone));
        }
    }

    #[test]
    fn renumbering_refuses_accepting_cycles() {
        let ta = demo();
        let cyc = Certificate::new(
            SubsumptionMode::Inclusion,
            vec![
                CertificateEntry::new(LocationId(0), ge(0), 0),
                CertificateEntry::new(LocationId(1), ge(0), 0),
                CertificateEntry::new(LocationId(2), ge(0), 0),
            ],
        );
        assert!(matches!(
            renumber(&ta, &cyc),
            Err(CertificateError::AcceptingCycle { .. })
        ));
    }

    #[test]
    fn missing_initial_entry() {
        let ta = demo();
        let mut c = demo_certificate();
        c.entries.retain(|e| e.location != LocationId(0));
        let v = check_certificate(&ta, &c).unwrap();
        assert_eq!(v.rejections.len(), 1);
        assert_eq!(v.rejections[0].subject, Subject::Initial);
        assert_eq!(v.rejections[0].reason, RejectionReason::InitialUncovered);
    }

    #[test]
    fn uncovered_successor() {
        let ta = demo();
        let mut c = demo_certificate();
        c.entries.retain(|e| e.location != LocationId(2));
        let v = check_certificate(&ta, &c).unwrap();
        assert!(v
            .rejections
            .iter()
            .all(|r| r.reason == RejectionReason::SuccessorUncovered));
        assert_eq!(v.rejections.len(), 2);
    }

    #[test]
    fn screening() {
        let ta = demo();
        let mut c = demo_certificate();
        let mut empty = Dbm::universe(1);
        empty.set(1, 0, Bound::lt(0));
        c.entries
            .push(CertificateEntry::new(LocationId(2), empty, 0));
        let mut loose = Dbm::universe(1);
        loose.set(0, 1, Bound::le(-1));
        loose.set(1, 0, Bound::le(3));
        loose.set(0, 0, Bound::le(0));
        loose.set(1, 1, Bound::le(5));
        c.entries
            .push(CertificateEntry::new(LocationId(2), loose, 0));
        let v = check_certificate(&ta, &c).unwrap();
        let reasons: Vec<_> = v.rejections.iter().map(|r| (r.subject, r.reason)).collect();
        assert_eq!(
            reasons,
            vec![
                (Subject::Entry(5), RejectionReason::EmptyZone),
                (Subject::Entry(6), RejectionReason::NotCanonical),
            ]
        );
        let ff = check_certificate_with(
            &ta,
            &c,
            &CheckOptions {
                jobs: Some(2),
                fail_fast: true,
            },
        )
        .unwrap();
        assert_eq!(ff.rejections.len(), 1);
    }

    #[test]
    fn structural_errors() {
        let ta = demo();
        let mut c = demo_certificate();
        c.entries[3].zone = Dbm::zero(2);
        assert_eq!(
            check_certificate(&ta, &c),
            Err(CertificateError::DimensionMismatch {
                entry: 3,
                expected: 1,
                found: 2
            })
        );
        let mut c = demo_certificate();
        c.entries[0].location = LocationId(9);
        assert!(matches!(
            check_certificate(&ta, &c),
            Err(CertificateError::UnknownLocation { entry: 0, .. })
        ));
    }

    #[test]
    fn jobs_do_not_change_verdict() {
        let ta = demo();
        let mut c = demo_certificate();
        for e in &mut c.entries {
            e.numbering = 1;
        }
        let base = check_certificate_with(
            &ta,
            &c,
            &CheckOptions {
                jobs: Some(1),
                fail_fast: false,
            },
        )
        .unwrap();
        for jobs in [2, 4, 8] {
            let v = check_certificate_with(
                &ta,
                &c,
                &CheckOptions {
                    jobs: Some(jobs),
                    fail_fast: false,
                },
            )
            .unwrap();
            assert_eq!(v, base);
        }
    }
}
