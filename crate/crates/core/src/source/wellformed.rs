//! The implicit syntactic constraints on source terms:
//!
//! 1. record rows do not define the same name twice;
//! 2. bindings do not define the same variable twice;
//! 3. bindings do not contain forward references to definitions of unknown
//!    size.
//!
//! A forward reference exists from definition `i` to definition `j` when
//! `i <= j` and the variable of `j` occurs free in the right-hand side of
//! `i`; note that a definition referring to itself counts.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::names::Ident;

use super::ast::{
    DiagnosticCode, Diagnostics, NodePath, SizeIndication, SourceBinding, SourceExpr,
};
use super::subst::free_vars;

/// Checks conditions 1-3 on every subterm. Empty diagnostics means
/// well-formed. Never fails: every violation is reported with its path.
pub fn check_wellformed(e: &SourceExpr) -> Diagnostics {
    let mut diags = Diagnostics::default();
    let mut path = Vec::new();
    walk(e, &mut path, &mut diags);
    diags
}

fn walk(e: &SourceExpr, path: &mut Vec<usize>, diags: &mut Diagnostics) {
    match e {
        SourceExpr::Var(_) | SourceExpr::Nat(_) | SourceExpr::Bool(_) => {}
        SourceExpr::Lam(_, body) => {
            path.push(0);
            walk(body, path, diags);
            path.pop();
        }
        SourceExpr::App(f, a) => {
            path.push(0);
            walk(f, path, diags);
            path.pop();
            path.push(1);
            walk(a, path, diags);
            path.pop();
        }
        SourceExpr::Record(row) => {
            let mut seen = BTreeSet::new();
            for (field, _) in row {
                if !seen.insert(field.clone()) {
                    diags.push(
                        DiagnosticCode::DuplicateField,
                        format!("record row defines field {field} twice"),
                        NodePath(path.clone()),
                    );
                }
            }
        }
        SourceExpr::Select(s, _) => {
            path.push(0);
            walk(s, path, diags);
            path.pop();
        }
        SourceExpr::Letrec(b, body) => {
            check_binding(b, path, diags);
            for (i, d) in b.0.iter().enumerate() {
                path.push(i);
                walk(&d.rhs, path, diags);
                path.pop();
            }
            path.push(b.0.len());
            walk(body, path, diags);
            path.pop();
        }
        SourceExpr::Prim(_, l, r) => {
            path.push(0);
            walk(l, path, diags);
            path.pop();
            path.push(1);
            walk(r, path, diags);
            path.pop();
        }
        SourceExpr::If(c, t, f) => {
            for (i, sub) in [c, t, f].into_iter().enumerate() {
                path.push(i);
                walk(sub, path, diags);
                path.pop();
            }
        }
    }
}

fn check_binding(b: &SourceBinding, path: &mut Vec<usize>, diags: &mut Diagnostics) {
    let mut seen: BTreeSet<&Ident> = BTreeSet::new();
    for d in &b.0 {
        if !seen.insert(&d.var) {
            diags.push(
                DiagnosticCode::DuplicateBinder,
                format!("binding defines variable {} twice", d.var),
                NodePath(path.clone()),
            );
        }
    }
    for (i, d) in b.0.iter().enumerate() {
        let rhs_fv = free_vars(&d.rhs);
        for (j, target) in b.0.iter().enumerate() {
            if j >= i
                && rhs_fv.contains(&target.var)
                && matches!(target.size, SizeIndication::Unknown)
            {
                path.push(i);
                diags.push(
                    DiagnosticCode::ForwardRefToUnknownSize,
                    format!(
                        "definition of {} forward-references {}, whose size is unknown",
                        d.var, target.var
                    ),
                    NodePath(path.clone()),
                );
                path.pop();
            }
        }
    }
}
