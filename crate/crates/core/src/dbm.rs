//! Difference bound matrices.
//!
//! Entry `(i, j)` of a DBM over `n` clocks bounds `x_i - x_j`, where `x_0`
//! is the constant zero clock. Clock `c` of the model (0-based) lives at
//! matrix index `c + 1`.
//!
//! Operations that produce zones (`up`, `reset`, `constrain`,
//! `extra_lu_plus`) expect a canonical input and return a canonical result.
//! An empty result is marked by a negative `(0, 0)` entry.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_rational::Rational64;
use thiserror::Error;

use crate::model::{Atom, CmpOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DbmError {
    #[error("dimension mismatch: zone over {left} clocks vs zone over {right} clocks")]
    DimensionMismatch { left: usize, right: usize },
    #[error("clock index {clock} out of range for a zone over {clocks} clocks")]
    UnknownClock { clock: usize, clocks: usize },
    #[error("expected {expected} entries for a zone over {clocks} clocks, got {found}")]
    EntryCount {
        clocks: usize,
        expected: usize,
        found: usize,
    },
    #[error("LU bounds cover {found} clocks, zone has {clocks}")]
    LuMismatch { clocks: usize, found: usize },
}

/// Upper bound `< c`, `<= c` or infinity on a clock difference.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bound {
    value: i64,
    strict: bool,
}

impl Bound {
    pub const INFINITY: Bound = Bound {
        value: i64::MAX,
        strict: true,
    };
    pub const LE_ZERO: Bound = Bound {
        value: 0,
        strict: false,
    };

    pub const fn le(value: i64) -> Bound {
        Bound {
            value,
            strict: false,
        }
    }

    pub const fn lt(value: i64) -> Bound {
        Bound {
            value,
            strict: true,
        }
    }

    pub fn is_infinite(self) -> bool {
        self.value == i64::MAX
    }

    /// `None` for infinity.
    pub fn value(self) -> Option<i64> {
        (!self.is_infinite()).then_some(self.value)
    }

    pub fn is_strict(self) -> bool {
        self.strict
    }

    /// Whether `d` satisfies `d < c` / `d <= c`.
    pub fn admits(self, d: Rational64) -> bool {
        if self.is_infinite() {
            return true;
        }
        let c = Rational64::from_integer(self.value);
        if self.strict {
            d < c
        } else {
            d <= c
        }
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        // strict < weak at equal constants; INFINITY is the unique max
        self.value
            .cmp(&other.value)
            .then_with(|| other.strict.cmp(&self.strict))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Bound {
    type Output = Bound;

    fn add(self, rhs: Bound) -> Bound {
        if self.is_infinite() || rhs.is_infinite() {
            return Bound::INFINITY;
        }
        Bound {
            value: self.value + rhs.value,
            strict: self.strict || rhs.strict,
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Same token syntax as the certificate files: `INF`, `<c`, `<=c`.
impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.is_infinite(), self.strict) {
            (true, _) => f.write_str("INF"),
            (false, true) => write!(f, "<{}", self.value),
            (false, false) => write!(f, "<={}", self.value),
        }
    }
}

/// Per-clock maximal lower-bound (`L`) and upper-bound (`U`) guard
/// constants. `None` stands for minus infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LuBounds {
    pub lower: Vec<Option<i64>>,
    pub upper: Vec<Option<i64>>,
}

impl LuBounds {
    pub fn new(lower: Vec<Option<i64>>, upper: Vec<Option<i64>>) -> Self {
        assert_eq!(
            lower.len(),
            upper.len(),
            "L and U must cover the same clocks"
        );
        Self { lower, upper }
    }

    /// Every clock unconstrained: `L = U = -inf`.
    pub fn unbounded(clocks: usize) -> Self {
        Self::new(vec![None; clocks], vec![None; clocks])
    }

    /// Same constant for both bounds of every clock.
    pub fn uniform(clocks: usize, bound: i64) -> Self {
        Self::new(vec![Some(bound); clocks], vec![Some(bound); clocks])
    }

    pub fn clocks(&self) -> usize {
        self.lower.len()
    }

    // Matrix-index accessors; the reference clock has L = U = 0.
    fn l(&self, idx: usize) -> Option<i64> {
        if idx == 0 {
            Some(0)
        } else {
            self.lower[idx - 1]
        }
    }

    fn u(&self, idx: usize) -> Option<i64> {
        if idx == 0 {
            Some(0)
        } else {
            self.upper[idx - 1]
        }
    }
}

/// A zone over a fixed number of clocks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    clocks: usize,
    entries: Vec<Bound>,
}

impl Dbm {
    fn filled(clocks: usize, fill: Bound) -> Self {
        let size = clocks + 1;
        Dbm {
            clocks,
            entries: vec![fill; size * size],
        }
    }

    /// The single valuation mapping every clock to zero.
    pub fn zero(clocks: usize) -> Self {
        Self::filled(clocks, Bound::LE_ZERO)
    }

    /// All non-negative valuations.
    pub fn universe(clocks: usize) -> Self {
        let mut z = Self::filled(clocks, Bound::INFINITY);
        let size = z.size();
        for i in 0..size {
            z.entries[i * size + i] = Bound::LE_ZERO;
            z.entries[i] = Bound::LE_ZERO;
        }
        z
    }

    /// Raw matrix in row-major order; not canonicalized.
    pub fn from_entries(clocks: usize, entries: Vec<Bound>) -> Result<Self, DbmError> {
        let expected = (clocks + 1) * (clocks + 1);
        if entries.len() != expected {
            return Err(DbmError::EntryCount {
                clocks,
                expected,
                found: entries.len(),
            });
        }
        Ok(Dbm { clocks, entries })
    }

    pub fn clocks(&self) -> usize {
        self.clocks
    }

    /// Matrix side length, `clocks + 1`.
    pub fn size(&self) -> usize {
        self.clocks + 1
    }

    pub fn entries(&self) -> &[Bound] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.entries[i * self.size() + j]
    }

    /// Overwrites one entry without restoring canonical form.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, b: Bound) {
        let size = self.size();
        self.entries[i * size + j] = b;
    }

    fn mark_empty(&mut self) {
        self.entries[0] = Bound::lt(0);
    }

    fn same_dim(&self, other: &Dbm) -> Result<(), DbmError> {
        if self.clocks == other.clocks {
            Ok(())
        } else {
            Err(DbmError::DimensionMismatch {
                left: self.clocks,
                right: other.clocks,
            })
        }
    }

    fn check_clock(&self, clock: usize) -> Result<(), DbmError> {
        if clock < self.clocks {
            Ok(())
        } else {
            Err(DbmError::UnknownClock {
                clock,
                clocks: self.clocks,
            })
        }
    }

    fn check_lu(&self, lu: &LuBounds) -> Result<(), DbmError> {
        if lu.clocks() == self.clocks {
            Ok(())
        } else {
            Err(DbmError::LuMismatch {
                clocks: self.clocks,
                found: lu.clocks(),
            })
        }
    }

    /// Shortest-path closure in place. Also tightens the implicit
    /// non-negativity of clocks into row 0. Returns `false` if the zone is
    /// empty.
    pub fn canonicalize(&mut self) -> bool {
        let size = self.size();
        for j in 0..size {
            if self.get(0, j) > Bound::LE_ZERO {
                self.set(0, j, Bound::LE_ZERO);
            }
            if self.get(j, j) > Bound::LE_ZERO {
                self.set(j, j, Bound::LE_ZERO);
            }
        }
        for k in 0..size {
            for i in 0..size {
                let ik = self.get(i, k);
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..size {
                    let candidate = ik + self.get(k, j);
                    if candidate < self.get(i, j) {
                        self.set(i, j, candidate);
                    }
                }
            }
        }
        let empty = (0..size).any(|i| self.get(i, i) < Bound::LE_ZERO);
        if empty {
            self.mark_empty();
        }
        !empty
    }

    pub fn canonical(&self) -> Dbm {
        let mut z = self.clone();
        z.canonicalize();
        z
    }

    pub fn is_empty(&self) -> bool {
        let size = self.size();
        if (0..size).any(|i| self.get(i, i) < Bound::LE_ZERO) {
            return true;
        }
        !self.clone().canonicalize()
    }

    /// Closed under the triangle inequality, zero diagonal, and every
    /// clock bounded below by zero in row 0.
    pub fn is_canonical(&self) -> bool {
        let size = self.size();
        if (0..size).any(|i| self.get(i, i) != Bound::LE_ZERO) {
            return false;
        }
        if (0..size).any(|j| self.get(0, j) > Bound::LE_ZERO) {
            return false;
        }
        for i in 0..size {
            for k in 0..size {
                let ik = self.get(i, k);
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..size {
                    if self.get(i, j) > ik + self.get(k, j) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `self ⊆ other`, assuming both canonical and of equal dimension.
    #[inline]
    pub(crate) fn le_entrywise(&self, other: &Dbm) -> bool {
        self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }

    /// Zone inclusion `self ⊆ other` on canonical zones.
    pub fn is_included_in(&self, other: &Dbm) -> Result<bool, DbmError> {
        self.same_dim(other)?;
        Ok(self.le_entrywise(other))
    }

    /// Intersects with `x_i - x_j ≤/< c` and restores canonical form in
    /// O(n²). Returns `false` (and marks the zone empty) on contradiction.
    pub fn tighten(&mut self, i: usize, j: usize, b: Bound) -> bool {
        if self.get(0, 0) < Bound::LE_ZERO {
            return false;
        }
        if b >= self.get(i, j) {
            return true;
        }
        if b + self.get(j, i) < Bound::LE_ZERO {
            self.mark_empty();
            return false;
        }
        self.set(i, j, b);
        let size = self.size();
        for k in 0..size {
            let ki = self.get(k, i);
            if ki.is_infinite() {
                continue;
            }
            let via = ki + b;
            for l in 0..size {
                let candidate = via + self.get(j, l);
                if candidate < self.get(k, l) {
                    self.set(k, l, candidate);
                }
            }
        }
        true
    }

    /// Delay closure: removes every upper bound on single clocks.
    pub fn up(&self) -> Dbm {
        let mut z = self.clone();
        if z.get(0, 0) < Bound::LE_ZERO {
            return z;
        }
        for i in 1..z.size() {
            z.set(i, 0, Bound::INFINITY);
        }
        z
    }

    /// Sets the given clocks (0-based model indices) to zero.
    pub fn reset(&self, clocks: &[usize]) -> Result<Dbm, DbmError> {
        for &c in clocks {
            self.check_clock(c)?;
        }
        let mut z = self.clone();
        if z.get(0, 0) < Bound::LE_ZERO {
            return Ok(z);
        }
        let size = z.size();
        for &c in clocks {
            let x = c + 1;
            for j in 0..size {
                z.set(x, j, z.get(0, j));
                z.set(j, x, z.get(j, 0));
            }
            z.set(x, x, Bound::LE_ZERO);
        }
        Ok(z)
    }

    /// Intersects with a conjunction of diagonal-free atoms.
    pub fn constrain(&self, atoms: &[Atom]) -> Result<Dbm, DbmError> {
        for a in atoms {
            self.check_clock(a.clock)?;
        }
        let mut z = self.clone();
        for a in atoms {
            if !z.apply_atom(a) {
                break;
            }
        }
        Ok(z)
    }

    fn apply_atom(&mut self, a: &Atom) -> bool {
        let x = a.clock + 1;
        let c = i64::from(a.constant);
        match a.op {
            CmpOp::Lt => self.tighten(x, 0, Bound::lt(c)),
            CmpOp::Le => self.tighten(x, 0, Bound::le(c)),
            CmpOp::Gt => self.tighten(0, x, Bound::lt(-c)),
            CmpOp::Ge => self.tighten(0, x, Bound::le(-c)),
            CmpOp::Eq => self.tighten(x, 0, Bound::le(c)) && self.tighten(0, x, Bound::le(-c)),
        }
    }

    /// `Extra+_LU` extrapolation of a canonical non-empty zone.
    #[allow(clippy::needless_range_loop)]
    pub fn extra_lu_plus(&self, lu: &LuBounds) -> Result<Dbm, DbmError> {
        self.check_lu(lu)?;
        let size = self.size();
        if self.get(0, 0) < Bound::LE_ZERO {
            return Ok(self.clone());
        }
        // lower bound of x_i strictly above L(x_i) / U(x_i)
        let above = |i: usize, bound: Option<i64>| match bound {
            None => true,
            Some(c) => self.get(0, i) < Bound::lt(-c),
        };
        let above_l: Vec<bool> = (0..size).map(|i| i > 0 && above(i, lu.l(i))).collect();
        let above_u: Vec<bool> = (0..size).map(|j| j > 0 && above(j, lu.u(j))).collect();

        let mut z = self.clone();
        for i in 0..size {
            for j in 0..size {
                if i == j {
                    continue;
                }
                let entry = self.get(i, j);
                let drop_row = i > 0
                    && (above_l[i]
                        || match lu.l(i) {
                            None => true,
                            Some(l) => entry > Bound::le(l),
                        });
                if drop_row {
                    z.set(i, j, Bound::INFINITY);
                } else if above_u[j] {
                    if i == 0 {
                        let weakened = match lu.u(j) {
                            None => Bound::LE_ZERO,
                            Some(u) => Bound::lt(-u),
                        };
                        z.set(0, j, weakened);
                    } else {
                        z.set(i, j, Bound::INFINITY);
                    }
                }
            }
        }
        z.canonicalize();
        Ok(z)
    }

    /// `self ⊆ α_≼LU(other)` for canonical non-empty zones, decided on the
    /// matrices: the inclusion fails iff some `x` and some `y ≠ x` (either
    /// may be the reference clock, with `L = U = 0` there) satisfy `self(0,x) ≥ (≤,-U(x))`, `other(y,x) < self(y,x)` and
    /// `other(y,x) + (<,-L(y)) < self(0,x)`.
    pub fn is_alpha_lu_subsumed_by(&self, other: &Dbm, lu: &LuBounds) -> Result<bool, DbmError> {
        self.same_dim(other)?;
        self.check_lu(lu)?;
        Ok(self.alpha_lu_le(other, lu))
    }

    pub(crate) fn alpha_lu_le(&self, other: &Dbm, lu: &LuBounds) -> bool {
        let size = self.size();
        for x in 0..size {
            let Some(ux) = lu.u(x) else { continue };
            let lower_x = self.get(0, x);
            if lower_x < Bound::le(-ux) {
                continue;
            }
            for y in 0..size {
                if y == x {
                    continue;
                }
                let Some(ly) = lu.l(y) else { continue };
                let theirs = other.get(y, x);
                if theirs < self.get(y, x) && theirs + Bound::lt(-ly) < lower_x {
                    return false;
                }
            }
        }
        true
    }

    /// Membership of a valuation given per model clock.
    pub fn contains(&self, valuation: &[Rational64]) -> bool {
        assert_eq!(valuation.len(), self.clocks, "valuation arity");
        if valuation.iter().any(|v| *v < Rational64::from_integer(0)) {
            return false;
        }
        let at = |i: usize| {
            if i == 0 {
                Rational64::from_integer(0)
            } else {
                valuation[i - 1]
            }
        };
        let size = self.size();
        (0..size).all(|i| (0..size).all(|j| self.get(i, j).admits(at(i) - at(j))))
    }
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dbm[")?;
        let size = self.size();
        for i in 0..size {
            if i > 0 {
                write!(f, " |")?;
            }
            for j in 0..size {
                write!(f, " {}", self.get(i, j))?;
            }
        }
        write!(f, " ]")
    }
}
