//! The in-place-update translation from the source to the target calculus.
//!
//! Everything but `rec` is mapped homomorphically. A binding becomes a
//! single flat `let` in two passes: the pre-allocation pass binds each
//! known-size definition to a dummy block `alloc n`, and the update pass
//! then evaluates the definitions in order, either updating the matching
//! dummy block in place (known size) or just binding the result (unknown
//! size). Forward references are sound precisely because every definition
//! that can be forward-referenced has a pre-allocated block to point to.

use alloc::vec::Vec;

use crate::names::Ident;
use crate::source::{
    check_wellformed, free_vars, Diagnostics, NodePath, SizeIndication, SourceBinding, SourceExpr,
};
use crate::target::{Configuration, LetDef, TargetExpr, TargetValue, VarRef};

/// What the translation did for one binding definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslNote {
    /// `x = alloc n` emitted in the pre-allocation pass, `_ = update x ...`
    /// in the update pass.
    PreAllocated { var: Ident, size: u32 },
    /// Unknown size: the definition is bound directly.
    DirectBind { var: Ident },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationOutput {
    pub expr: TargetExpr,
    pub notes: Vec<(NodePath, TranslNote)>,
}

/// Translates a well-formed source term.
pub fn transl(e: &SourceExpr) -> TargetExpr {
    let mut notes = Vec::new();
    transl_at(e, &mut Vec::new(), &mut notes)
}

/// Like [`transl`], also reporting per-definition decisions.
pub fn transl_with_notes(e: &SourceExpr) -> TranslationOutput {
    let mut notes = Vec::new();
    let expr = transl_at(e, &mut Vec::new(), &mut notes);
    TranslationOutput { expr, notes }
}

fn transl_at(
    e: &SourceExpr,
    path: &mut Vec<usize>,
    notes: &mut Vec<(NodePath, TranslNote)>,
) -> TargetExpr {
    match e {
        SourceExpr::Var(x) => TargetExpr::Var(VarRef::Var(x.clone())),
        SourceExpr::Nat(n) => TargetExpr::Nat(*n),
        SourceExpr::Bool(b) => TargetExpr::Bool(*b),
        SourceExpr::Lam(x, body) => {
            path.push(0);
            let b = transl_at(body, path, notes);
            path.pop();
            TargetExpr::Lam(x.clone(), alloc::boxed::Box::new(b))
        }
        SourceExpr::App(f, a) => {
            path.push(0);
            let tf = transl_at(f, path, notes);
            path.pop();
            path.push(1);
            let ta = transl_at(a, path, notes);
            path.pop();
            TargetExpr::app(tf, ta)
        }
        SourceExpr::Record(row) => TargetExpr::Record(
            row.iter()
                .map(|(f, x)| (f.clone(), TargetValue::Var(VarRef::Var(x.clone()))))
                .collect(),
        ),
        SourceExpr::Select(s, f) => {
            path.push(0);
            let ts = transl_at(s, path, notes);
            path.pop();
            TargetExpr::Select(alloc::boxed::Box::new(ts), f.clone())
        }
        SourceExpr::Letrec(b, body) => {
            let mut defs = dum(b);
            defs.extend(up_at(b, path, notes));
            path.push(b.0.len());
            let tbody = transl_at(body, path, notes);
            path.pop();
            TargetExpr::Let(defs, alloc::boxed::Box::new(tbody))
        }
        SourceExpr::Prim(op, l, r) => {
            path.push(0);
            let tl = transl_at(l, path, notes);
            path.pop();
            path.push(1);
            let tr = transl_at(r, path, notes);
            path.pop();
            TargetExpr::Prim(*op, alloc::boxed::Box::new(tl), alloc::boxed::Box::new(tr))
        }
        SourceExpr::If(c, t, f) => {
            path.push(0);
            let tc = transl_at(c, path, notes);
            path.pop();
            path.push(1);
            let tt = transl_at(t, path, notes);
            path.pop();
            path.push(2);
            let tf = transl_at(f, path, notes);
            path.pop();
            TargetExpr::If(
                alloc::boxed::Box::new(tc),
                alloc::boxed::Box::new(tt),
                alloc::boxed::Box::new(tf),
            )
        }
    }
}

/// Pre-allocation pass: `x = alloc n` for each known-size definition, in
/// binding order; unknown-size definitions contribute nothing.
pub fn dum(b: &SourceBinding) -> Vec<LetDef> {
    b.0.iter()
        .filter_map(|d| match d.size {
            SizeIndication::Known(n) => Some(LetDef {
                binder: crate::target::Binder::Named(d.var.clone()),
                rhs: TargetExpr::alloc_block(n),
            }),
            SizeIndication::Unknown => None,
        })
        .collect()
}

/// Update pass: known-size definitions update their block and discard the
/// unit result; unknown-size definitions bind their value. Order is the
/// binding order.
pub fn up(b: &SourceBinding) -> Vec<LetDef> {
    up_at(b, &mut Vec::new(), &mut Vec::new())
}

fn up_at(
    b: &SourceBinding,
    path: &mut Vec<usize>,
    notes: &mut Vec<(NodePath, TranslNote)>,
) -> Vec<LetDef> {
    b.0.iter()
        .enumerate()
        .map(|(i, d)| {
            path.push(i);
            let rhs = transl_at(&d.rhs, path, notes);
            let note_path = {
                let mut p = path.clone();
                p.pop();
                p.push(i);
                NodePath(p)
            };
            path.pop();
            match d.size {
                SizeIndication::Known(n) => {
                    notes.push((
                        note_path,
                        TranslNote::PreAllocated {
                            var: d.var.clone(),
                            size: n,
                        },
                    ));
                    LetDef {
                        binder: crate::target::Binder::Wildcard,
                        rhs: TargetExpr::update(
                            TargetExpr::Var(VarRef::Var(d.var.clone())),
                            rhs,
                        ),
                    }
                }
                SizeIndication::Unknown => {
                    notes.push((
                        note_path,
                        TranslNote::DirectBind {
                            var: d.var.clone(),
                        },
                    ));
                    LetDef {
                        binder: crate::target::Binder::Named(d.var.clone()),
                        rhs,
                    }
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    IllFormed(Diagnostics),
    /// The program has free variables; only closed programs translate to
    /// runnable configurations.
    Open(Vec<Ident>),
}

/// Pairs the translated program with an empty heap. The input must be
/// well-formed and closed.
pub fn translate_program(e: &SourceExpr) -> Result<Configuration, TranslateError> {
    let diags = check_wellformed(e);
    if !diags.is_empty() {
        return Err(TranslateError::IllFormed(diags));
    }
    let fv = free_vars(e);
    if !fv.is_empty() {
        return Err(TranslateError::Open(fv.into_iter().collect()));
    }
    Ok(Configuration::initial(transl(e)))
}
