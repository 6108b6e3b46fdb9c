//! The concrete size model shared by both calculi.
//!
//! Functions compile to a fixed-size closure block (two words: code pointer
//! plus environment pointer), so their size does not depend on the set of
//! free variables — which keeps sizes invariant under substitution. Records
//! take one header word plus one word per field. Dummy blocks carry their
//! size literally.
//!
//! Variables have no size of their own, and neither do the immediate
//! (unboxed) literals of the arithmetic extension; a known-size binding
//! slot can therefore never be satisfied by a literal.

use alloc::format;
use alloc::vec::Vec;

use crate::source::{
    check_wellformed, Definition, DiagnosticCode, Diagnostics, NodePath, SizeIndication,
    SourceBinding, SourceExpr,
};
use crate::source::free_vars;
use crate::target::StoredValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeModel {
    /// Heap words for a closure. At least 1.
    pub function_size: u32,
    /// Header words of a record block; a record of n fields occupies
    /// `record_header + n` words.
    pub record_header: u32,
}

impl Default for SizeModel {
    fn default() -> Self {
        SizeModel {
            function_size: 2,
            record_header: 1,
        }
    }
}

impl SizeModel {
    pub fn record_size(&self, fields: usize) -> u32 {
        self.record_header + fields as u32
    }

    /// Size of a source value. `None` for variables and literals, which are
    /// not represented by their own heap block.
    pub fn size_source_value(&self, v: &SourceExpr) -> Option<u32> {
        debug_assert!(v.is_value(), "size_source_value applied to a non-value");
        match v {
            SourceExpr::Lam(..) => Some(self.function_size),
            SourceExpr::Record(row) => Some(self.record_size(row.len())),
            _ => None,
        }
    }

    /// Size of a stored value. Total: every heap block has a size. The size
    /// depends only on the head constructor and field count, so it is
    /// invariant under value-for-variable substitution.
    pub fn size_stored_value(&self, hv: &StoredValue) -> u32 {
        match hv {
            StoredValue::Lam(..) => self.function_size,
            StoredValue::AllocBlock(n) => *n,
            StoredValue::Record(row) => self.record_size(row.len()),
        }
    }
}

/// Annotates forward-referenced definitions with their manifest sizes.
///
/// A definition needs a known size exactly when some definition at or
/// before it mentions its variable. If such a definition's right-hand side
/// is syntactically an abstraction or a record, its size is manifest and
/// gets annotated; an existing annotation is kept as written. Anything else
/// (a variable, a literal, an application...) has no manifest size and is
/// reported as unsizable. Definitions that are not forward-referenced are
/// left untouched.
pub fn infer_size_annotations(
    b: &SourceBinding,
    model: &SizeModel,
) -> Result<SourceBinding, Diagnostics> {
    let mut diags = Diagnostics::default();
    let mut out: Vec<Definition> = Vec::new();
    let fvs: Vec<_> = b.0.iter().map(|d| free_vars(&d.rhs)).collect();
    for (j, d) in b.0.iter().enumerate() {
        let forward_referenced = fvs[..=j].iter().any(|fv| fv.contains(&d.var));
        let mut def = d.clone();
        if forward_referenced && matches!(d.size, SizeIndication::Unknown) {
            match manifest_size(&d.rhs, model) {
                Some(n) => def.size = SizeIndication::Known(n),
                None => diags.push(
                    DiagnosticCode::UnsizableForwardTarget,
                    format!(
                        "{} is forward-referenced but its definition has no manifest size",
                        d.var
                    ),
                    NodePath(alloc::vec![j]),
                ),
            }
        }
        out.push(def);
    }
    if diags.is_empty() {
        Ok(SourceBinding(out))
    } else {
        Err(diags)
    }
}

fn manifest_size(e: &SourceExpr, model: &SizeModel) -> Option<u32> {
    match e {
        SourceExpr::Lam(..) => Some(model.function_size),
        SourceExpr::Record(row) => Some(model.record_size(row.len())),
        _ => None,
    }
}

/// Applies `infer_size_annotations` to every binding of a term, outside-in.
pub fn infer_sizes_in_expr(e: &SourceExpr, model: &SizeModel) -> Result<SourceExpr, Diagnostics> {
    let annotated = map_bindings(e, &mut |b| infer_size_annotations(b, model))?;
    // Inference may only have fixed condition-3 violations, never introduced
    // new ones, but the cheap recheck keeps the contract obvious.
    let diags = check_wellformed(&annotated);
    if diags.is_empty() {
        Ok(annotated)
    } else {
        Err(diags)
    }
}

fn map_bindings(
    e: &SourceExpr,
    f: &mut impl FnMut(&SourceBinding) -> Result<SourceBinding, Diagnostics>,
) -> Result<SourceExpr, Diagnostics> {
    use alloc::boxed::Box;
    Ok(match e {
        SourceExpr::Var(_) | SourceExpr::Nat(_) | SourceExpr::Bool(_) | SourceExpr::Record(_) => {
            e.clone()
        }
        SourceExpr::Lam(x, b) => SourceExpr::Lam(x.clone(), Box::new(map_bindings(b, f)?)),
        SourceExpr::App(a, b) => {
            SourceExpr::App(Box::new(map_bindings(a, f)?), Box::new(map_bindings(b, f)?))
        }
        SourceExpr::Select(s, fld) => {
            SourceExpr::Select(Box::new(map_bindings(s, f)?), fld.clone())
        }
        SourceExpr::Letrec(b, body) => {
            let b2 = f(b)?;
            let defs = b2
                .0
                .iter()
                .map(|d| {
                    Ok(Definition {
                        var: d.var.clone(),
                        size: d.size,
                        rhs: map_bindings(&d.rhs, f)?,
                    })
                })
                .collect::<Result<Vec<_>, Diagnostics>>()?;
            SourceExpr::Letrec(SourceBinding(defs), Box::new(map_bindings(body, f)?))
        }
        SourceExpr::Prim(op, l, r) => SourceExpr::Prim(
            *op,
            Box::new(map_bindings(l, f)?),
            Box::new(map_bindings(r, f)?),
        ),
        SourceExpr::If(c, t, e2) => SourceExpr::If(
            Box::new(map_bindings(c, f)?),
            Box::new(map_bindings(t, f)?),
            Box::new(map_bindings(e2, f)?),
        ),
    })
}

/// Warns about known-size annotations that contradict the manifest size of
/// their right-hand side. A mismatch is not an error — the right-hand side
/// may still evaluate to a correctly sized value — but a manifest
/// abstraction or record of the wrong size is certainly stuck at runtime.
pub fn check_annotation_consistency(e: &SourceExpr, model: &SizeModel) -> Diagnostics {
    let mut diags = Diagnostics::default();
    let mut path = Vec::new();
    annotation_walk(e, model, &mut path, &mut diags);
    diags
}

fn annotation_walk(
    e: &SourceExpr,
    model: &SizeModel,
    path: &mut Vec<usize>,
    diags: &mut Diagnostics,
) {
    match e {
        SourceExpr::Var(_) | SourceExpr::Nat(_) | SourceExpr::Bool(_) | SourceExpr::Record(_) => {}
        SourceExpr::Lam(_, b) => {
            path.push(0);
            annotation_walk(b, model, path, diags);
            path.pop();
        }
        SourceExpr::App(a, b) => {
            path.push(0);
            annotation_walk(a, model, path, diags);
            path.pop();
            path.push(1);
            annotation_walk(b, model, path, diags);
            path.pop();
        }
        SourceExpr::Select(s, _) => {
            path.push(0);
            annotation_walk(s, model, path, diags);
            path.pop();
        }
        SourceExpr::Letrec(b, body) => {
            for (i, d) in b.0.iter().enumerate() {
                if let SizeIndication::Known(n) = d.size {
                    if let Some(m) = manifest_size(&d.rhs, model) {
                        if m != n {
                            path.push(i);
                            diags.push(
                                DiagnosticCode::SizeAnnotationMismatch,
                                format!(
                                    "{} is annotated =[{n}] but its definition has manifest size {m}",
                                    d.var
                                ),
                                NodePath(path.clone()),
                            );
                            path.pop();
                        }
                    }
                }
                path.push(i);
                annotation_walk(&d.rhs, model, path, diags);
                path.pop();
            }
            path.push(b.0.len());
            annotation_walk(body, model, path, diags);
            path.pop();
        }
        SourceExpr::Prim(_, l, r) => {
            path.push(0);
            annotation_walk(l, model, path, diags);
            path.pop();
            path.push(1);
            annotation_walk(r, model, path, diags);
            path.pop();
        }
        SourceExpr::If(c, t, f2) => {
            for (i, sub) in [c, t, f2].into_iter().enumerate() {
                path.push(i);
                annotation_walk(sub, model, path, diags);
                path.pop();
            }
        }
    }
}

/// Convenience used in several places: does `v` satisfy slot `size`?
/// Unknown slots accept any value; known slots demand a non-variable value
/// of exactly the indicated size.
pub fn respects_size(model: &SizeModel, size: SizeIndication, v: &SourceExpr) -> bool {
    if !v.is_value() {
        return false;
    }
    match size {
        SizeIndication::Unknown => true,
        SizeIndication::Known(n) => !matches!(v, SourceExpr::Var(_))
            && model.size_source_value(v) == Some(n),
    }
}
