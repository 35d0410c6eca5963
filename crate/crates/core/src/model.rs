//! Timed Büchi automata and their line-oriented text format.
//!
//! ```text
//! # comments run to end of line
//! clock x
//! location q0 initial
//! location q1 accepting invariant: x <= 5
//! edge q0 -> q1 guard: x >= 1 && x < 3 reset: x
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dbm::{Dbm, LuBounds};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared clock `{name}`")]
    UndeclaredClock { line: usize, name: String },
    #[error("line {line}: undeclared location `{name}`")]
    UndeclaredLocation { line: usize, name: String },
    #[error("line {line}: `{name}` declared twice")]
    Duplicate { line: usize, name: String },
    #[error("no initial location")]
    MissingInitial,
    #[error("line {line}: second initial location `{name}`")]
    MultipleInitial { line: usize, name: String },
    #[error("the zero valuation violates the invariant of initial location `{name}`")]
    InitialInvariant { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// Contributes to the clock's lower-bound constant `L`.
    pub fn is_lower(self) -> bool {
        matches!(self, CmpOp::Gt | CmpOp::Ge | CmpOp::Eq)
    }

    /// Contributes to the clock's upper-bound constant `U`.
    pub fn is_upper(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Eq)
    }
}

/// `clock op constant` with a natural constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub clock: usize,
    pub op: CmpOp,
    pub constant: u32,
}

impl Atom {
    pub fn new(clock: usize, op: CmpOp, constant: u32) -> Self {
        Self {
            clock,
            op,
            constant,
        }
    }
}

pub type Conjunction = Vec<Atom>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocationId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub accepting: bool,
    pub invariant: Conjunction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: LocationId,
    pub guard: Conjunction,
    pub resets: Vec<usize>,
    pub target: LocationId,
}

/// Validated automaton. Construct through [`TimedAutomaton::new`] or
/// [`parse_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedAutomaton {
    clocks: Vec<String>,
    locations: Vec<Location>,
    initial: LocationId,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<usize>>,
}

impl TimedAutomaton {
    /// Checks references and that the zero valuation satisfies the initial
    /// invariant. Line numbers in errors are 0 here.
    pub fn new(
        clocks: Vec<String>,
        locations: Vec<Location>,
        initial: LocationId,
        edges: Vec<Edge>,
    ) -> Result<Self, ModelError> {
        let n = clocks.len();
        let bad_clock = |c: usize| ModelError::UndeclaredClock {
            line: 0,
            name: format!("#{c}"),
        };
        let bad_loc = |l: LocationId| ModelError::UndeclaredLocation {
            line: 0,
            name: format!("#{}", l.0),
        };
        if initial.0 >= locations.len() {
            return Err(ModelError::MissingInitial);
        }
        for loc in &locations {
            if let Some(a) = loc.invariant.iter().find(|a| a.clock >= n) {
                return Err(bad_clock(a.clock));
            }
        }
        let mut outgoing = vec![Vec::new(); locations.len()];
        for (idx, e) in edges.iter().enumerate() {
            for l in [e.source, e.target] {
                if l.0 >= locations.len() {
                    return Err(bad_loc(l));
                }
            }
            if let Some(a) = e.guard.iter().find(|a| a.clock >= n) {
                return Err(bad_clock(a.clock));
            }
            if let Some(&c) = e.resets.iter().find(|&&c| c >= n) {
                return Err(bad_clock(c));
            }
            outgoing[e.source.0].push(idx);
        }
        let init_loc = &locations[initial.0];
        if Dbm::zero(n)
            .constrain(&init_loc.invariant)
            .map(|z| z.is_empty())
            .unwrap_or(true)
        {
            return Err(ModelError::InitialInvariant {
                name: init_loc.name.clone(),
            });
        }
        Ok(Self {
            clocks,
            locations,
            initial,
            edges,
            outgoing,
        })
    }

    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    pub fn clock_names(&self) -> &[String] {
        &self.clocks
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, id: LocationId) -> &Location {
        &self.locations[id.0]
    }

    pub fn location_by_name(&self, name: &str) -> Option<LocationId> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .map(LocationId)
    }

    pub fn clock_by_name(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c == name)
    }

    pub fn initial(&self) -> LocationId {
        self.initial
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge indices leaving `loc`, in declaration order.
    pub fn outgoing(&self, loc: LocationId) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.outgoing[loc.0].iter().map(|&i| (i, &self.edges[i]))
    }

    pub fn invariant(&self, loc: LocationId) -> &[Atom] {
        &self.locations[loc.0].invariant
    }

    pub fn is_accepting(&self, loc: LocationId) -> bool {
        self.locations[loc.0].accepting
    }

    /// Largest constant appearing in any guard or invariant.
    pub fn max_constant(&self) -> u32 {
        self.all_atoms().map(|a| a.constant).max().unwrap_or(0)
    }

    fn all_atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.locations
            .iter()
            .flat_map(|l| l.invariant.iter())
            .chain(self.edges.iter().flat_map(|e| e.guard.iter()))
    }

    fn write_conj(&self, f: &mut fmt::Formatter<'_>, conj: &[Atom]) -> fmt::Result {
        for (k, a) in conj.iter().enumerate() {
            if k > 0 {
                f.write_str(" && ")?;
            }
            write!(
                f,
                "{} {} {}",
                self.clocks[a.clock],
                a.op.symbol(),
                a.constant
            )?;
        }
        Ok(())
    }
}

/// Global per-clock LU bounds taken over every guard and invariant.
pub fn compute_lu(ta: &TimedAutomaton) -> LuBounds {
    let n = ta.clock_count();
    let mut lower: Vec<Option<i64>> = vec![None; n];
    let mut upper: Vec<Option<i64>> = vec![None; n];
    for a in ta.all_atoms() {
        let c = Some(i64::from(a.constant));
        if a.op.is_lower() {
            lower[a.clock] = lower[a.clock].max(c);
        }
        if a.op.is_upper() {
            upper[a.clock] = upper[a.clock].max(c);
        }
    }
    LuBounds::new(lower, upper)
}

/// Büchi acceptance on symbolic states; only the location matters.
pub fn accepting_predicate(ta: &TimedAutomaton) -> impl Fn(LocationId, &Dbm) -> bool + '_ {
    move |loc, _zone| ta.is_accepting(loc)
}

impl fmt::Display for TimedAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clocks {
            writeln!(f, "clock {c}")?;
        }
        for (idx, loc) in self.locations.iter().enumerate() {
            write!(f, "location {}", loc.name)?;
            if idx == self.initial.0 {
                f.write_str(" initial")?;
            }
            if loc.accepting {
                f.write_str(" accepting")?;
            }
            if !loc.invariant.is_empty() {
                f.write_str(" invariant: ")?;
                self.write_conj(f, &loc.invariant)?;
            }
            writeln!(f)?;
        }
        for e in &self.edges {
            write!(
                f,
                "edge {} -> {}",
                self.locations[e.source.0].name, self.locations[e.target.0].name
            )?;
            if !e.guard.is_empty() {
                f.write_str(" guard: ")?;
                self.write_conj(f, &e.guard)?;
            }
            if !e.resets.is_empty() {
                let names: Vec<&str> = e.resets.iter().map(|&c| self.clocks[c].as_str()).collect();
                write!(f, " reset: {}", names.join(","))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for TimedAutomaton {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

struct Clauses<'a> {
    head: &'a str,
    guard: Option<&'a str>,
    reset: Option<&'a str>,
    invariant: Option<&'a str>,
}

/// Splits `head [key: body]...` at the `guard:`, `reset:` and
/// `invariant:` markers.
fn split_clauses(line: &str, lineno: usize) -> Result<Clauses<'_>, ModelError> {
    const KEYS: [&str; 3] = ["guard:", "reset:", "invariant:"];
    let mut marks: Vec<(usize, &str)> = Vec::new();
    for key in KEYS {
        let mut found = line.match_indices(key);
        if let Some((pos, _)) = found.next() {
            marks.push((pos, key));
        }
        if found.next().is_some() {
            return Err(ModelError::Syntax {
                line: lineno,
                message: format!("repeated `{key}` clause"),
            });
        }
    }
    marks.sort_unstable();
    let head_end = marks.first().map_or(line.len(), |m| m.0);
    let mut clauses = Clauses {
        head: line[..head_end].trim(),
        guard: None,
        reset: None,
        invariant: None,
    };
    for (k, &(pos, key)) in marks.iter().enumerate() {
        let end = marks.get(k + 1).map_or(line.len(), |m| m.0);
        let body = line[pos + key.len()..end].trim();
        match key {
            "guard:" => clauses.guard = Some(body),
            "reset:" => clauses.reset = Some(body),
            _ => clauses.invariant = Some(body),
        }
    }
    Ok(clauses)
}

fn parse_atom(
    text: &str,
    clocks: &HashMap<&str, usize>,
    lineno: usize,
) -> Result<Atom, ModelError> {
    let syntax = |message: String| ModelError::Syntax {
        line: lineno,
        message,
    };
    let text = text.trim();
    let op_start = text
        .find(['<', '>', '=', '!'])
        .ok_or_else(|| syntax(format!("expected `clock op constant`, found `{text}`")))?;
    let name = text[..op_start].trim();
    let rest = &text[op_start..];
    let (op, rest) = [
        ("<=", CmpOp::Le),
        (">=", CmpOp::Ge),
        ("==", CmpOp::Eq),
        ("<", CmpOp::Lt),
        (">", CmpOp::Gt),
    ]
    .into_iter()
    .find_map(|(sym, op)| rest.strip_prefix(sym).map(|r| (op, r)))
    .ok_or_else(|| syntax(format!("unknown comparison in `{text}`")))?;
    if !is_identifier(name) {
        if name.contains('-') {
            return Err(syntax(format!(
                "diagonal constraints are not supported: `{text}`"
            )));
        }
        return Err(syntax(format!("bad clock name `{name}`")));
    }
    let rest = rest.trim();
    let constant: u32 = rest
        .parse()
        .map_err(|_| syntax(format!("expected a natural constant, found `{rest}`")))?;
    let clock = *clocks
        .get(name)
        .ok_or_else(|| ModelError::UndeclaredClock {
            line: lineno,
            name: name.to_string(),
        })?;
    Ok(Atom {
        clock,
        op,
        constant,
    })
}

fn parse_conj(
    text: &str,
    clocks: &HashMap<&str, usize>,
    lineno: usize,
) -> Result<Conjunction, ModelError> {
    let text = text.trim();
    if text.is_empty() || text == "true" {
        return Ok(Vec::new());
    }
    text.split("&&")
        .map(|a| parse_atom(a, clocks, lineno))
        .collect()
}

pub fn parse_model(text: &str) -> Result<TimedAutomaton, ModelError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    // declarations first so that edges and invariants may refer forward
    let mut clock_names: Vec<String> = Vec::new();
    let mut clock_index: HashMap<&str, usize> = HashMap::new();
    let mut loc_index: HashMap<&str, usize> = HashMap::new();
    let mut loc_lines: Vec<(usize, &str)> = Vec::new();
    for &(lineno, line) in &lines {
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "clock" => {
                if !is_identifier(rest) {
                    return Err(ModelError::Syntax {
                        line: lineno,
                        message: format!("bad clock name `{rest}`"),
                    });
                }
                if clock_index.insert(rest, clock_names.len()).is_some() {
                    return Err(ModelError::Duplicate {
                        line: lineno,
                        name: rest.to_string(),
                    });
                }
                clock_names.push(rest.to_string());
            }
            "location" => {
                let name = rest.split_whitespace().next().unwrap_or("");
                if !is_identifier(name) {
                    return Err(ModelError::Syntax {
                        line: lineno,
                        message: format!("bad location name `{name}`"),
                    });
                }
                if loc_index.insert(name, loc_lines.len()).is_some() {
                    return Err(ModelError::Duplicate {
                        line: lineno,
                        name: name.to_string(),
                    });
                }
                loc_lines.push((lineno, rest));
            }
            "edge" => {}
            other => {
                return Err(ModelError::Syntax {
                    line: lineno,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }

    let mut locations = Vec::with_capacity(loc_lines.len());
    let mut initial: Option<usize> = None;
    for (idx, &(lineno, rest)) in loc_lines.iter().enumerate() {
        let clauses = split_clauses(rest, lineno)?;
        if clauses.guard.is_some() || clauses.reset.is_some() {
            return Err(ModelError::Syntax {
                line: lineno,
                message: "locations take only an `invariant:` clause".into(),
            });
        }
        let mut words = clauses.head.split_whitespace();
        let name = words.next().unwrap_or_default();
        let mut accepting = false;
        for flag in words {
            match flag {
                "initial" => {
                    if initial.replace(idx).is_some() {
                        return Err(ModelError::MultipleInitial {
                            line: lineno,
                            name: name.to_string(),
                        });
                    }
                }
                "accepting" => accepting = true,
                other => {
                    return Err(ModelError::Syntax {
                        line: lineno,
                        message: format!("unknown location flag `{other}`"),
                    })
                }
            }
        }
        let invariant = match clauses.invariant {
            Some(body) => parse_conj(body, &clock_index, lineno)?,
            None => Vec::new(),
        };
        locations.push(Location {
            name: name.to_string(),
            accepting,
            invariant,
        });
    }
    let initial = initial.ok_or(ModelError::MissingInitial)?;

    let mut edges = Vec::new();
    for &(lineno, line) in &lines {
        let Some(rest) = line.strip_prefix("edge") else {
            continue;
        };
        if !rest.starts_with(char::is_whitespace) {
            continue;
        }
        let clauses = split_clauses(rest, lineno)?;
        if clauses.invariant.is_some() {
            return Err(ModelError::Syntax {
                line: lineno,
                message: "edges take only `guard:` and `reset:` clauses".into(),
            });
        }
        let (src, dst) = clauses
            .head
            .split_once("->")
            .ok_or_else(|| ModelError::Syntax {
                line: lineno,
                message: "expected `edge <src> -> <dst>`".into(),
            })?;
        let lookup = |name: &str| {
            let name = name.trim();
            loc_index.get(name).map(|&i| LocationId(i)).ok_or_else(|| {
                ModelError::UndeclaredLocation {
                    line: lineno,
                    name: name.to_string(),
                }
            })
        };
        let source = lookup(src)?;
        let target = lookup(dst)?;
        let guard = match clauses.guard {
            Some(body) => parse_conj(body, &clock_index, lineno)?,
            None => Vec::new(),
        };
        let mut resets = Vec::new();
        if let Some(body) = clauses.reset {
            for name in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let c = *clock_index
                    .get(name)
                    .ok_or_else(|| ModelError::UndeclaredClock {
                        line: lineno,
                        name: name.to_string(),
                    })?;
                if !resets.contains(&c) {
                    resets.push(c);
                }
            }
        }
        edges.push(Edge {
            source,
            guard,
            resets,
            target,
        });
    }

    TimedAutomaton::new(clock_names, locations, LocationId(initial), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const DEMO: &str = "\
# q0 -> q1 twice, q1 <-> q2
clock x
location q0 initial
location q1 accepting
location q2
edge q0 -> q1
edge q0 -> q1 guard: x >= 1
edge q1 -> q2 guard: x < 2 reset: x
edge q2 -> q1 guard: x >= 2
";

    #[test]
    fn parses_demo() {
        let ta = parse_model(DEMO).unwrap();
        assert_eq!(ta.edges().len(), 4);
        assert_eq!(ta.clock_count(), 1);
        assert_eq!(ta.locations().len(), 3);
        assert_eq!(ta.initial(), LocationId(0));
        assert!(ta.is_accepting(LocationId(1)));
        assert_eq!(ta.edges()[2].guard, vec![Atom::new(0, CmpOp::Lt, 2)]);
        assert_eq!(ta.edges()[2].resets, vec![0]);
    }

    #[test]
    fn no_edges_is_fine() {
        let ta = parse_model("clock x\nlocation a initial\n").unwrap();
        assert!(ta.edges().is_empty());
    }

    #[test]
    fn undeclared_clock_is_named() {
        let err =
            parse_model("clock x\nlocation a initial\nedge a -> a guard: y < 1\n").unwrap_err();
        assert_eq!(
            err,
            ModelError::UndeclaredClock {
                line: 3,
                name: "y".into()
            }
        );
        let err = parse_model("clock x\nlocation a initial\nedge a -> a reset: y\n").unwrap_err();
        assert!(matches!(err, ModelError::UndeclaredClock { name, .. } if name == "y"));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            parse_model("clock x\nlocation a\n").unwrap_err(),
            ModelError::MissingInitial
        );
        assert!(matches!(
            parse_model("location a initial\nedge a -> b\n").unwrap_err(),
            ModelError::UndeclaredLocation { line: 2, .. }
        ));
        assert!(matches!(
            parse_model("clock x\nlocation a initial invariant: x >= 1\n").unwrap_err(),
            ModelError::InitialInvariant { .. }
        ));
        assert!(matches!(
            parse_model("clock x\nclock y\nlocation a initial\nedge a -> a guard: x - y < 1\n")
                .unwrap_err(),
            ModelError::Syntax { line: 4, .. }
        ));
        assert!(matches!(
            parse_model("clock x\nlocation a initial\nlocation b initial\n").unwrap_err(),
            ModelError::MultipleInitial { line: 3, .. }
        ));
        assert!(matches!(
            parse_model("clock x\nlocation a initial\nedge a -> a guard: x < -1\n").unwrap_err(),
            ModelError::Syntax { line: 3, .. }
        ));
        assert!(matches!(
            parse_model("clocks x\n").unwrap_err(),
            ModelError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn compact_atoms_and_invariants() {
        let ta = parse_model(
            "clock x\nclock y\nlocation a initial invariant: x<=5&&y<3\nedge a -> a guard: x==3 reset: x , y\n",
        )
        .unwrap();
        assert_eq!(ta.invariant(LocationId(0)).len(), 2);
        assert_eq!(ta.edges()[0].resets, vec![0, 1]);
    }

    #[test]
    fn print_then_parse_is_identity() {
        let ta = parse_model(DEMO).unwrap();
        let again = parse_model(&ta.to_string()).unwrap();
        assert_eq!(ta, again);
    }

    #[test]
    fn lu_examples() {
        let ta = parse_model(DEMO).unwrap();
        assert_eq!(compute_lu(&ta), LuBounds::uniform(1, 2));

        let free = parse_model("clock x\nclock y\nlocation a initial\nedge a -> a\n").unwrap();
        assert_eq!(compute_lu(&free), LuBounds::unbounded(2));

        let eq = parse_model("clock x\nlocation a initial\nedge a -> a guard: x == 3\n").unwrap();
        assert_eq!(compute_lu(&eq), LuBounds::uniform(1, 3));
    }

    #[test]
    fn acceptance_depends_on_location_only() {
        let ta = parse_model(DEMO).unwrap();
        let phi = accepting_predicate(&ta);
        let z = Dbm::universe(1);
        assert!(phi(LocationId(1), &z));
        assert!(phi(LocationId(1), &Dbm::zero(1)));
        assert!(!phi(LocationId(0), &z));

        let no_f = parse_model("clock x\nlocation a initial\nedge a -> a\n").unwrap();
        assert!(!accepting_predicate(&no_f)(LocationId(0), &z));
    }
}
