use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::names::{FieldName, Ident, PrimOp};

/// A source expression.
///
/// Records are restricted to contain only variables; allowing arbitrary
/// values in record position would break the sharing story of the calculus,
/// so the parser and the well-formedness checker both reject it.
///
/// The `Nat`/`Bool`/`Prim`/`If` constructors belong to the arithmetic
/// extension and only appear when parsing with the extension enabled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceExpr {
    Var(Ident),
    Lam(Ident, Box<SourceExpr>),
    App(Box<SourceExpr>, Box<SourceExpr>),
    Record(Vec<(FieldName, Ident)>),
    Select(Box<SourceExpr>, FieldName),
    Letrec(SourceBinding, Box<SourceExpr>),
    Nat(u64),
    Bool(bool),
    Prim(PrimOp, Box<SourceExpr>, Box<SourceExpr>),
    If(Box<SourceExpr>, Box<SourceExpr>, Box<SourceExpr>),
}

impl SourceExpr {
    pub fn var(name: &str) -> Self {
        SourceExpr::Var(Ident::from(name))
    }

    pub fn lam(binder: &str, body: SourceExpr) -> Self {
        SourceExpr::Lam(Ident::from(binder), Box::new(body))
    }

    pub fn app(f: SourceExpr, a: SourceExpr) -> Self {
        SourceExpr::App(Box::new(f), Box::new(a))
    }

    pub fn select(subject: SourceExpr, field: &str) -> Self {
        SourceExpr::Select(Box::new(subject), FieldName::from(field))
    }

    pub fn letrec(defs: Vec<Definition>, body: SourceExpr) -> Self {
        SourceExpr::Letrec(SourceBinding(defs), Box::new(body))
    }

    /// A value is a variable, an abstraction, a record, or a literal of the
    /// extension.
    pub fn is_value(&self) -> bool {
        matches!(
            self,
            SourceExpr::Var(_)
                | SourceExpr::Lam(..)
                | SourceExpr::Record(_)
                | SourceExpr::Nat(_)
                | SourceExpr::Bool(_)
        )
    }

    /// True when the expression mentions a construct of the arithmetic
    /// extension anywhere.
    pub fn uses_prims(&self) -> bool {
        match self {
            SourceExpr::Var(_) | SourceExpr::Record(_) => false,
            SourceExpr::Lam(_, b) => b.uses_prims(),
            SourceExpr::App(f, a) => f.uses_prims() || a.uses_prims(),
            SourceExpr::Select(s, _) => s.uses_prims(),
            SourceExpr::Letrec(b, e) => {
                b.0.iter().any(|d| d.rhs.uses_prims()) || e.uses_prims()
            }
            SourceExpr::Nat(_) | SourceExpr::Bool(_) | SourceExpr::Prim(..) | SourceExpr::If(..) => {
                true
            }
        }
    }

    /// Number of AST nodes, used by the harness shrinker and the
    /// linear-growth check on the translation.
    pub fn node_count(&self) -> usize {
        match self {
            SourceExpr::Var(_) | SourceExpr::Nat(_) | SourceExpr::Bool(_) => 1,
            SourceExpr::Record(row) => 1 + row.len(),
            SourceExpr::Lam(_, b) => 1 + b.node_count(),
            SourceExpr::App(f, a) => 1 + f.node_count() + a.node_count(),
            SourceExpr::Select(s, _) => 1 + s.node_count(),
            SourceExpr::Prim(_, l, r) => 1 + l.node_count() + r.node_count(),
            SourceExpr::If(c, t, e) => 1 + c.node_count() + t.node_count() + e.node_count(),
            SourceExpr::Letrec(b, e) => {
                1 + e.node_count() + b.0.iter().map(|d| 1 + d.rhs.node_count()).sum::<usize>()
            }
        }
    }
}

/// Size indication on a binding definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeIndication {
    Unknown,
    /// Expected size of the value's heap block, in words. Always >= 1:
    /// the size model never produces zero-word blocks.
    Known(u32),
}

/// One definition `x =? e` or `x =[n] e` of a binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub var: Ident,
    pub size: SizeIndication,
    pub rhs: SourceExpr,
}

impl Definition {
    pub fn unknown(var: &str, rhs: SourceExpr) -> Self {
        Definition {
            var: Ident::from(var),
            size: SizeIndication::Unknown,
            rhs,
        }
    }

    pub fn known(var: &str, size: u32, rhs: SourceExpr) -> Self {
        Definition {
            var: Ident::from(var),
            size: SizeIndication::Known(size),
            rhs,
        }
    }
}

/// An ordered binding `x1 =i1 e1, ..., xn =in en`. Left-to-right order is
/// the evaluation order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceBinding(pub Vec<Definition>);

impl SourceBinding {
    pub fn domain(&self) -> impl Iterator<Item = &Ident> {
        self.0.iter().map(|d| &d.var)
    }
}

/// Path from the root of a term to a node, as child indices.
///
/// Children are numbered left to right in the order the constructor stores
/// them; a letrec numbers its definitions first and the body last.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        f.write_str("root")?;
        for i in &self.0 {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

/// Why a term is not well-formed (or, for warnings, suspicious).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticCode {
    /// Condition 1: a record row defines the same field twice.
    DuplicateField,
    /// Condition 2: a binding defines the same variable twice.
    DuplicateBinder,
    /// Condition 3: a forward reference targets a definition of unknown size.
    ForwardRefToUnknownSize,
    /// A forward-referenced definition has no manifest size to infer.
    UnsizableForwardTarget,
    /// Warning: a known-size annotation contradicts the manifest size of
    /// its right-hand side.
    SizeAnnotationMismatch,
    /// The expression uses the arithmetic extension but it is disabled.
    PrimsDisabled,
    ParseError,
}

impl DiagnosticCode {
    /// The syntactic-constraint number, for conditions that have one.
    pub fn condition_number(&self) -> Option<u8> {
        match self {
            DiagnosticCode::DuplicateField => Some(1),
            DiagnosticCode::DuplicateBinder => Some(2),
            DiagnosticCode::ForwardRefToUnknownSize => Some(3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub path: NodePath,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.code.condition_number() {
            Some(n) => write!(f, "condition {}: {} (at {})", n, self.message, self.path),
            None => write!(f, "{} (at {})", self.message, self.path),
        }
    }
}

/// A list of diagnostics; empty means the term passed every check.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, code: DiagnosticCode, message: String, path: NodePath) {
        self.0.push(Diagnostic {
            code,
            message,
            path,
        });
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}
