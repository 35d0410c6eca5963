//! Emptiness checking and certification for timed Büchi automata.
//!
//! The crate is organised bottom-up:
//!
//! * [`dbm`]: difference bound matrices, `Extra+_LU` and the `α_≼LU`
//!   subsumption test,
//! * [`model`]: automata and the text model format,
//! * [`zone_graph`]: symbolic successors,
//! * [`theory`]: finite graphs and topological numberings,
//! * [`generator`]: NDFS and iterative-SCC emptiness checks that export
//!   subsumption graphs, plus certificate extraction,
//! * [`certifier`]: the certificate checker,
//! * [`oracle`]: exhaustive reference engines,
//! * [`formats`]: certificate, graph and renaming files.

pub mod certifier;
pub mod dbm;
pub mod fixtures;
pub mod formats;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod synth;
pub mod theory;
pub mod zone_graph;

pub use certifier::{
    check_certificate, check_certificate_with, cover_graph, renumber, Certificate,
    CertificateEntry, CertificateError, CheckOptions, Rejection, RejectionReason, Subject, Verdict,
};
pub use dbm::{Bound, Dbm, DbmError, LuBounds};
pub use generator::{
    extract_certificate, iterative_scc_emptiness, ndfs_emptiness, CheckResult, Emptiness, Lasso,
    SubsumptionGraph,
};
pub use model::{compute_lu, parse_model, LocationId, ModelError, TimedAutomaton};
pub use theory::{FiniteGraph, Numbering};
pub use zone_graph::{Cover, SubsumptionMode, SymbolicState};
