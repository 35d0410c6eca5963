//! Text formats for certificates, subsumption graphs and renaming
//! dictionaries.
//!
//! All files are UTF-8, whitespace separated, with `#` comments. A bound is
//! one of `INF`, `<n` or `<=n` for a decimal (possibly negative) integer
//! `n`. Zones are written row-major as `(n+1)²` bounds.
//!
//! ```text
//! certificate v1
//! mode inclusion
//! clocks 1 x
//! entry q0 3 <=0 <=0 INF <=0
//! ```
//!
//! ```text
//! graph v1
//! mode alpha-lu
//! clocks 1 x
//! accepting q1
//! node 0 q0 <=0 <=0 INF <=0
//! node 1 q1 <=0 <=0 INF <=0
//! edge 0 1
//! subsume 1 0
//! initial 0
//! ```
//!
//! Names in files are resolved against a model by name. With a renaming
//! dictionary (`location <name> <index>` / `clock <name> <index>` lines),
//! files may use the indices instead and the dictionary maps them back to
//! the model's names.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::certifier::{Certificate, CertificateEntry};
use crate::dbm::{Bound, Dbm};
use crate::generator::SubsumptionGraph;
use crate::model::{LocationId, TimedAutomaton};
use crate::zone_graph::{SubsumptionMode, SymbolicState};

/// Finite bound constants are limited so that sums never overflow.
pub const MAX_CONSTANT: i64 = 1 << 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown location `{name}`")]
    UnknownLocation { line: usize, name: String },
    #[error("unknown clock `{name}`")]
    UnknownClock { name: String },
    #[error("file declares {found} clocks, model has {expected}")]
    ClockCount { expected: usize, found: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_bound(token: &str) -> Option<Bound> {
    if token == "INF" {
        return Some(Bound::INFINITY);
    }
    let (strict, digits) = match token.strip_prefix("<=") {
        Some(rest) => (false, rest),
        None => (true, token.strip_prefix('<')?),
    };
    if digits.starts_with('+') {
        return None;
    }
    let value: i64 = digits.parse().ok()?;
    if value.abs() > MAX_CONSTANT {
        return None;
    }
    Some(if strict {
        Bound::lt(value)
    } else {
        Bound::le(value)
    })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, l)| {
        let content = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        (!toks.is_empty()).then_some((k + 1, toks))
    })
}

fn parse_nat(line: usize, tok: &str, what: &str) -> Result<u64, FormatError> {
    if tok.starts_with('+') {
        return Err(syntax(line, format!("invalid {what} `{tok}`")));
    }
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

fn parse_bounds(line: usize, toks: &[&str]) -> Result<Vec<Bound>, FormatError> {
    toks.iter()
        .map(|t| parse_bound(t).ok_or_else(|| syntax(line, format!("malformed bound `{t}`"))))
        .collect()
}

fn write_zone(out: &mut String, z: &Dbm) {
    for b in z.entries() {
        let _ = write!(out, " {b}");
    }
}

/// Clock and location names in model order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Names {
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
}

impl Names {
    pub fn of(ta: &TimedAutomaton) -> Self {
        Self {
            clocks: ta.clock_names().to_vec(),
            locations: ta.locations().iter().map(|l| l.name.clone()).collect(),
        }
    }

    /// Generic names `x0, x1, …` and `q0, q1, …`.
    pub fn generic(clocks: usize, locations: usize) -> Self {
        Self {
            clocks: (0..clocks).map(|c| format!("x{c}")).collect(),
            locations: (0..locations).map(|l| format!("q{l}")).collect(),
        }
    }

    fn location(&self, id: LocationId) -> &str {
        &self.locations[id.0]
    }
}

/// Human-readable name to index, per namespace.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Renaming {
    pub locations: HashMap<String, u64>,
    pub clocks: HashMap<String, u64>,
    location_names: HashMap<u64, String>,
    clock_names: HashMap<u64, String>,
}

impl Renaming {
    pub fn len(&self) -> usize {
        self.locations.len() + self.clocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn location_name(&self, index: u64) -> Option<&str> {
        self.location_names.get(&index).map(String::as_str)
    }

    pub fn clock_name(&self, index: u64) -> Option<&str> {
        self.clock_names.get(&index).map(String::as_str)
    }

    /// Renaming with indices assigned in model order.
    pub fn of(names: &Names) -> Self {
        let mut r = Renaming::default();
        for (k, n) in names.locations.iter().enumerate() {
            r.locations.insert(n.clone(), k as u64);
            r.location_names.insert(k as u64, n.clone());
        }
        for (k, n) in names.clocks.iter().enumerate() {
            r.clocks.insert(n.clone(), k as u64);
            r.clock_names.insert(k as u64, n.clone());
        }
        r
    }

    /// Inverse direction: token in a file to the human-readable name.
    fn translate<'a>(&'a self, token: &'a str, clock: bool) -> Option<&'a str> {
        let index: u64 = token.parse().ok()?;
        if clock {
            self.clock_name(index)
        } else {
            self.location_name(index)
        }
    }
}

pub fn read_renaming(text: &str) -> Result<Renaming, FormatError> {
    let mut r = Renaming::default();
    for (line, toks) in lines(text) {
        let [kind, name, idx] = toks[..] else {
            return Err(syntax(line, "expected `location|clock <name> <index>`"));
        };
        let index = parse_nat(line, idx, "index")?;
        let (by_name, by_index) = match kind {
            "location" => (&mut r.locations, &mut r.location_names),
            "clock" => (&mut r.clocks, &mut r.clock_names),
            other => return Err(syntax(line, format!("unknown namespace `{other}`"))),
        };
        if by_name.contains_key(name) {
            return Err(syntax(line, format!("{kind} `{name}` renamed twice")));
        }
        if by_index.contains_key(&index) {
            return Err(syntax(line, format!("{kind} index {index} used twice")));
        }
        by_name.insert(name.to_string(), index);
        by_index.insert(index, name.to_string());
    }
    Ok(r)
}

pub fn write_renaming(r: &Renaming) -> String {
    let mut out = String::new();
    let mut locs: Vec<_> = r.locations.iter().collect();
    locs.sort_by_key(|(_, &i)| i);
    for (n, i) in locs {
        let _ = writeln!(out, "location {n} {i}");
    }
    let mut clocks: Vec<_> = r.clocks.iter().collect();
    clocks.sort_by_key(|(_, &i)| i);
    for (n, i) in clocks {
        let _ = writeln!(out, "clock {n} {i}");
    }
    out
}

/// Maps file names onto a target naming: locations by name, clock columns
/// by permutation.
struct Resolver<'a> {
    locations: HashMap<&'a str, LocationId>,
    renaming: Option<&'a Renaming>,
    /// file matrix index -> target matrix index
    perm: Vec<usize>,
}

impl<'a> Resolver<'a> {
    fn new(
        file_clocks: &'a [String],
        target: &'a Names,
        renaming: Option<&'a Renaming>,
    ) -> Result<Self, FormatError> {
        if file_clocks.len() != target.clocks.len() {
            return Err(FormatError::ClockCount {
                expected: target.clocks.len(),
                found: file_clocks.len(),
            });
        }
        let mut perm = vec![0];
        for c in file_clocks {
            let name = renaming
                .and_then(|r| r.translate(c, true))
                .unwrap_or(c.as_str());
            let idx = target
                .clocks
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| FormatError::UnknownClock { name: c.clone() })?;
            perm.push(idx + 1);
        }
        let locations = target
            .locations
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), LocationId(k)))
            .collect();
        Ok(Self {
            locations,
            renaming,
            perm,
        })
    }

    fn location(&self, line: usize, token: &str) -> Result<LocationId, FormatError> {
        let name = self
            .renaming
            .and_then(|r| r.translate(token, false))
            .unwrap_or(token);
        self.locations
            .get(name)
            .copied()
            .ok_or_else(|| FormatError::UnknownLocation {
                line,
                name: token.to_string(),
            })
    }

    fn zone(&self, bounds: &[Bound]) -> Dbm {
        let size = self.perm.len();
        let mut entries = vec![Bound::INFINITY; size * size];
        for a in 0..size {
            for b in 0..size {
                entries[self.perm[a] * size + self.perm[b]] = bounds[a * size + b];
            }
        }
        Dbm::from_entries(size - 1, entries).expect("arity checked on read")
    }
}

/// Shared header lines: `mode …` and `clocks n names…`.
#[derive(Default)]
struct Header {
    mode: Option<SubsumptionMode>,
    clocks: Option<Vec<String>>,
}

impl Header {
    fn accept(&mut self, line: usize, toks: &[&str]) -> Result<bool, FormatError> {
        match toks[0] {
            "mode" => {
                if self.mode.is_some() {
                    return Err(syntax(line, "duplicate mode line"));
                }
                let [_, m] = toks[..] else {
                    return Err(syntax(line, "expected `mode inclusion|alpha-lu`"));
                };
                self.mode = Some(m.parse().map_err(|e: String| syntax(line, e))?);
                Ok(true)
            }
            "clocks" => {
                if self.clocks.is_some() {
                    return Err(syntax(line, "duplicate clocks line"));
                }
                let n = toks
                    .get(1)
                    .ok_or_else(|| syntax(line, "expected `clocks <n> <names…>`"))?;
                let n = parse_nat(line, n, "clock count")? as usize;
                let names: Vec<String> = toks[2..].iter().map(|s| s.to_string()).collect();
                if names.len() != n {
                    return Err(syntax(
                        line,
                        format!("clocks line declares {n} clocks but names {}", names.len()),
                    ));
                }
                for (k, name) in names.iter().enumerate() {
                    if names[..k].contains(name) {
                        return Err(syntax(line, format!("clock `{name}` listed twice")));
                    }
                }
                self.clocks = Some(names);
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn ready(&self, line: usize) -> Result<(SubsumptionMode, &[String]), FormatError> {
        match (self.mode, &self.clocks) {
            (Some(m), Some(c)) => Ok((m, c)),
            _ => Err(syntax(line, "`mode` and `clocks` must precede the body")),
        }
    }

    fn write(out: &mut String, mode: SubsumptionMode, clocks: &[String]) {
        let _ = writeln!(out, "mode {mode}");
        let _ = write!(out, "clocks {}", clocks.len());
        for c in clocks {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
}

fn expect_magic<'t>(
    it: &mut impl Iterator<Item = (usize, Vec<&'t str>)>,
    magic: &str,
) -> Result<(), FormatError> {
    match it.next() {
        Some((_, toks)) if toks == [magic, "v1"] => Ok(()),
        Some((line, _)) => Err(syntax(line, format!("expected `{magic} v1`"))),
        None => Err(syntax(1, format!("expected `{magic} v1`"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEntry {
    pub line: usize,
    pub location: String,
    pub numbering: u64,
    pub bounds: Vec<Bound>,
}

/// A certificate file before its names are resolved against a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateDocument {
    pub mode: SubsumptionMode,
    pub clocks: Vec<String>,
    pub entries: Vec<RawEntry>,
}

impl CertificateDocument {
    pub fn resolve(
        &self,
        ta: &TimedAutomaton,
        renaming: Option<&Renaming>,
    ) -> Result<Certificate, FormatError> {
        self.resolve_names(&Names::of(ta), renaming)
    }

    pub fn resolve_names(
        &self,
        names: &Names,
        renaming: Option<&Renaming>,
    ) -> Result<Certificate, FormatError> {
        let r = Resolver::new(&self.clocks, names, renaming)?;
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(CertificateEntry::new(
                    r.location(e.line, &e.location)?,
                    r.zone(&e.bounds),
                    e.numbering,
                ))
            })
            .collect::<Result<_, FormatError>>()?;
        Ok(Certificate::new(self.mode, entries))
    }
}

pub fn read_certificate(text: &str) -> Result<CertificateDocument, FormatError> {
    let mut it = lines(text);
    expect_magic(&mut it, "certificate")?;
    let mut header = Header::default();
    let mut body = Vec::new();
    for (line, toks) in it {
        if header.accept(line, &toks)? {
            if !body.is_empty() {
                return Err(syntax(line, "header line after entries"));
            }
            continue;
        }
        if toks[0] != "entry" {
            return Err(syntax(line, format!("unexpected `{}`", toks[0])));
        }
        header.ready(line)?;
        body.push((line, toks));
    }
    let (mode, clocks) = header.ready(0)?;
    let size = clocks.len() + 1;
    let arity = 3 + size * size;
    let entries = body
        .par_iter()
        .map(|(line, toks)| {
            let line = *line;
            if toks.len() != arity {
                return Err(syntax(
                    line,
                    format!("entry needs {arity} fields, found {}", toks.len()),
                ));
            }
            Ok(RawEntry {
                line,
                location: toks[1].to_string(),
                numbering: parse_nat(line, toks[2], "numbering")?,
                bounds: parse_bounds(line, &toks[3..])?,
            })
        })
        .collect::<Vec<Result<RawEntry, FormatError>>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CertificateDocument {
        mode,
        clocks: clocks.to_vec(),
        entries,
    })
}

pub fn write_certificate(c: &Certificate, names: &Names) -> String {
    let mut out = String::from("certificate v1\n");
    Header::write(&mut out, c.mode, &names.clocks);
    for e in &c.entries {
        let _ = write!(out, "entry {} {}", names.location(e.location), e.numbering);
        write_zone(&mut out, &e.zone);
        out.push('\n');
    }
    out
}

/// A graph file with names resolved against the file itself: locations
/// are numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDocument {
    pub names: Names,
    pub graph: SubsumptionGraph,
}

impl GraphDocument {
    pub fn resolve(
        &self,
        ta: &TimedAutomaton,
        renaming: Option<&Renaming>,
    ) -> Result<SubsumptionGraph, FormatError> {
        self.resolve_names(&Names::of(ta), renaming)
    }

    /// Re-expresses the graph over `target`'s location and clock order.
    pub fn resolve_names(
        &self,
        target: &Names,
        renaming: Option<&Renaming>,
    ) -> Result<SubsumptionGraph, FormatError> {
        let r = Resolver::new(&self.names.clocks, target, renaming)?;
        let mut g = self.graph.clone();
        for s in &mut g.nodes {
            s.location = r.location(0, &self.names.locations[s.location.0])?;
            s.zone = r.zone(s.zone.entries());
        }
        Ok(g)
    }
}

pub fn read_graph(text: &str) -> Result<GraphDocument, FormatError> {
    let mut it = lines(text);
    expect_magic(&mut it, "graph")?;
    let mut header = Header::default();
    let mut locations: Vec<String> = Vec::new();
    let mut accepting_locs: Option<Vec<usize>> = None;
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut nodes: Vec<SymbolicState> = Vec::new();
    let mut raw_edges: Vec<(usize, bool, u64, u64)> = Vec::new();
    let mut initial: Option<(usize, u64)> = None;

    let intern = |name: &str, locations: &mut Vec<String>| -> usize {
        match locations.iter().position(|l| l == name) {
            Some(k) => k,
            None => {
                locations.push(name.to_string());
                locations.len() - 1
            }
        }
    };

    for (line, toks) in it {
        if header.accept(line, &toks)? {
            if !nodes.is_empty() || accepting_locs.is_some() {
                return Err(syntax(line, "header line after body"));
            }
            continue;
        }
        let (_, clocks) = header.ready(line)?;
        let size = clocks.len() + 1;
        match toks[0] {
            "accepting" => {
                if accepting_locs.is_some() || !nodes.is_empty() {
                    return Err(syntax(line, "`accepting` must come once, before nodes"));
                }
                accepting_locs = Some(
                    toks[1..]
                        .iter()
                        .map(|n| intern(n, &mut locations))
                        .collect(),
                );
            }
            "node" => {
                if toks.len() != 3 + size * size {
                    return Err(syntax(
                        line,
                        format!(
                            "node needs {} fields, found {}",
                            3 + size * size,
                            toks.len()
                        ),
                    ));
                }
                let id = parse_nat(line, toks[1], "node id")?;
                if ids.insert(id, nodes.len()).is_some() {
                    return Err(syntax(line, format!("node {id} declared twice")));
                }
                let loc = intern(toks[2], &mut locations);
                let bounds = parse_bounds(line, &toks[3..])?;
                let zone = Dbm::from_entries(clocks.len(), bounds).expect("arity checked");
                nodes.push(SymbolicState::new(LocationId(loc), zone));
            }
            kind @ ("edge" | "subsume") => {
                let [_, u, v] = toks[..] else {
                    return Err(syntax(line, format!("expected `{kind} <u> <v>`")));
                };
                let u = parse_nat(line, u, "node id")?;
                let v = parse_nat(line, v, "node id")?;
                raw_edges.push((line, kind == "subsume", u, v));
            }
            "initial" => {
                let [_, id] = toks[..] else {
                    return Err(syntax(line, "expected `initial <id>`"));
                };
                if initial.is_some() {
                    return Err(syntax(line, "duplicate initial line"));
                }
                initial = Some((line, parse_nat(line, id, "node id")?));
            }
            other => return Err(syntax(line, format!("unexpected `{other}`"))),
        }
    }
    let (mode, clocks) = header.ready(0)?;
    let node = |line: usize, id: u64| {
        ids.get(&id)
            .copied()
            .ok_or_else(|| syntax(line, format!("no node {id}")))
    };
    let mut edges = Vec::new();
    let mut subsumptions = Vec::new();
    for (line, sub, u, v) in raw_edges {
        let (u, v) = (node(line, u)?, node(line, v)?);
        if sub {
            if nodes[u].location != nodes[v].location {
                return Err(syntax(line, "subsumption between different locations"));
            }
            subsumptions.push((u, v));
        } else {
            edges.push((u, v));
        }
    }
    let initial = match initial {
        Some((line, id)) => node(line, id)?,
        None if nodes.is_empty() => 0,
        None => return Err(syntax(0, "missing `initial` line")),
    };
    let acc = accepting_locs.unwrap_or_default();
    let accepting = nodes.iter().map(|s| acc.contains(&s.location.0)).collect();
    Ok(GraphDocument {
        names: Names {
            clocks: clocks.to_vec(),
            locations,
        },
        graph: SubsumptionGraph {
            mode,
            nodes,
            accepting,
            edges,
            subsumptions,
            initial,
        },
    })
}

pub fn write_graph(g: &SubsumptionGraph, names: &Names) -> String {
    let mut out = String::from("graph v1\n");
    Header::write(&mut out, g.mode, &names.clocks);
    let mut acc: Vec<usize> = g
        .nodes
        .iter()
        .zip(&g.accepting)
        .filter(|(_, &a)| a)
        .map(|(s, _)| s.location.0)
        .collect();
    acc.sort_unstable();
    acc.dedup();
    out.push_str("accepting");
    for l in acc {
        let _ = write!(out, " {}", names.locations[l]);
    }
    out.push('\n');
    for (k, s) in g.nodes.iter().enumerate() {
        let _ = write!(out, "node {k} {}", names.location(s.location));
        write_zone(&mut out, &s.zone);
        out.push('\n');
    }
    for (u, v) in &g.edges {
        let _ = writeln!(out, "edge {u} {v}");
    }
    for (u, v) in &g.subsumptions {
        let _ = writeln!(out, "subsume {u} {v}");
    }
    if !g.nodes.is_empty() {
        let _ = writeln!(out, "initial {}", g.initial);
    }
    out
}
