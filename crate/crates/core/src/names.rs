//! Identifiers shared by the two calculi.
//!
//! Program variables and record field names are plain strings. Heap
//! locations are a separate namespace: they print as `#N` and a `#` can
//! never start a program variable, so the two sets cannot collide.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;

/// A program variable (a binder or an occurrence).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(pub String);

impl Ident {
    pub fn new(s: impl Into<String>) -> Self {
        Ident(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident(s.to_owned())
    }
}

/// A record field name. Fields are rigid: alpha-conversion never touches them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldName(pub String);

impl FieldName {
    pub fn new(s: impl Into<String>) -> Self {
        FieldName(s.into())
    }
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FieldName {
    fn from(s: &str) -> Self {
        FieldName(s.to_owned())
    }
}

/// A heap location, printed `#N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location(pub u32);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Primitive operators of the optional arithmetic/boolean extension.
///
/// `And` and `Or` are short-circuiting: they evaluate their left operand
/// first and may discard the right one. The others are strict and, like
/// function application, evaluate right to left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Eq,
    Gt,
    And,
    Or,
}

impl PrimOp {
    pub fn is_short_circuit(self) -> bool {
        matches!(self, PrimOp::And | PrimOp::Or)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Eq => "=",
            PrimOp::Gt => ">",
            PrimOp::And => "and",
            PrimOp::Or => "or",
        }
    }
}

impl fmt::Display for PrimOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Picks a variant of `base` that avoids everything in `avoid`.
///
/// The base name is first stripped of any existing `'N` suffix, then primed
/// suffixes `'1`, `'2`, ... are tried in order. Deterministic, so reduction
/// traces are reproducible.
pub fn fresh_ident(base: &Ident, avoid: &BTreeSet<Ident>) -> Ident {
    let stem = match base.0.rfind('\'') {
        Some(i) if base.0[i + 1..].chars().all(|c| c.is_ascii_digit()) => &base.0[..i],
        _ => base.0.as_str(),
    };
    let stem = if stem.is_empty() { "x" } else { stem };
    let mut n: u64 = 1;
    loop {
        let candidate = Ident(alloc::format!("{stem}'{n}"));
        if !avoid.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}
