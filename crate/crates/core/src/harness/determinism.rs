//! Determinism checking for the source relation by exhaustive enumeration.
//!
//! The evaluator finds its redex by one directed search. Here instead we
//! enumerate *every* decomposition admitted by the context grammar, check
//! every rule against every decomposition, and demand that at most one
//! (rule, position) instance applies — and that its result is exactly what
//! the evaluator computed. This is the test-side oracle for the
//! determinism lemma; it is deliberately written against the grammar, not
//! against the evaluator's search.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::names::Ident;
use crate::sizing::{respects_size, SizeModel};
use crate::source::{
    alpha_equal, free_vars, reduce_step, subreduce, substitute, Definition, LiftFrame,
    SizeIndication, SourceBinding, SourceEvalContext, SourceExpr, SourceRule, StepOutcome,
    SubRule, Substitution, TopFrame,
};

/// All decompositions `(context, focus)` of `e` admitted by the staged
/// context grammar. Every subterm on the evaluation spine appears once,
/// including non-redex positions.
fn decompositions(e: &SourceExpr, model: &SizeModel) -> Vec<(SourceEvalContext, SourceExpr)> {
    let mut out = Vec::new();
    match e {
        SourceExpr::Letrec(b, body) => {
            // Binding slots: valid while the prefix is size-respecting.
            for i in 0..b.0.len() {
                let prefix_ok = b.0[..i]
                    .iter()
                    .all(|d| respects_size(model, d.size, &d.rhs));
                if !prefix_ok {
                    break;
                }
                let top = TopFrame::InBinding {
                    prefix: b.0[..i].to_vec(),
                    var: b.0[i].var.clone(),
                    size: b.0[i].size,
                    rest: b.0[i + 1..].to_vec(),
                    body: (**body).clone(),
                };
                nested(&b.0[i].rhs, &top, &mut Vec::new(), &mut out);
            }
            // Body position: valid when the whole binding is evaluated.
            if b.0
                .iter()
                .all(|d| respects_size(model, d.size, &d.rhs))
            {
                let top = TopFrame::UnderBinding { prefix: b.0.clone() };
                nested(body, &top, &mut Vec::new(), &mut out);
            }
        }
        _ => nested(e, &TopFrame::Nested, &mut Vec::new(), &mut out),
    }
    out
}

/// Enumerates nested-lift-context decompositions of `e` under `top`.
fn nested(
    e: &SourceExpr,
    top: &TopFrame,
    frames: &mut Vec<LiftFrame>,
    out: &mut Vec<(SourceEvalContext, SourceExpr)>,
) {
    out.push((
        SourceEvalContext {
            top: top.clone(),
            frames: frames.clone(),
        },
        e.clone(),
    ));
    match e {
        SourceExpr::App(f, a) => {
            // e [] : always.
            frames.push(LiftFrame::AppRight { func: (**f).clone() });
            nested(a, top, frames, out);
            frames.pop();
            // [] v : only when the argument is a value.
            if a.is_value() {
                frames.push(LiftFrame::AppLeft { arg: (**a).clone() });
                nested(f, top, frames, out);
                frames.pop();
            }
        }
        SourceExpr::Select(s, field) => {
            frames.push(LiftFrame::Select {
                field: field.clone(),
            });
            nested(s, top, frames, out);
            frames.pop();
        }
        SourceExpr::Prim(op, l, r) if op.is_short_circuit() => {
            frames.push(LiftFrame::ShortCircuitLeft {
                op: *op,
                right: (**r).clone(),
            });
            nested(l, top, frames, out);
            frames.pop();
        }
        SourceExpr::Prim(op, l, r) => {
            // e + [] : always.
            frames.push(LiftFrame::PrimRight {
                op: *op,
                left: (**l).clone(),
            });
            nested(r, top, frames, out);
            frames.pop();
            // [] + v : only when the right operand is a non-variable value
            // (a variable there must be dereferenced first).
            if r.is_value() && !matches!(**r, SourceExpr::Var(_)) {
                frames.push(LiftFrame::PrimLeft {
                    op: *op,
                    right: (**r).clone(),
                });
                nested(l, top, frames, out);
                frames.pop();
            }
        }
        SourceExpr::If(c, t, f) => {
            frames.push(LiftFrame::IfCond {
                then_branch: (**t).clone(),
                else_branch: (**f).clone(),
            });
            nested(c, top, frames, out);
            frames.pop();
        }
        // Values and letrec nodes end the spine.
        _ => {}
    }
}

fn binding_of(ctx: &SourceEvalContext) -> &[Definition] {
    match &ctx.top {
        TopFrame::Nested => &[],
        TopFrame::UnderBinding { prefix } => prefix,
        TopFrame::InBinding { prefix, .. } => prefix,
    }
}

fn is_deref_frame(f: &LiftFrame) -> bool {
    !matches!(f, LiftFrame::AppRight { .. })
}

/// All applicable (rule, result) instances over all decompositions.
pub fn enumerate_steps(e: &SourceExpr, model: &SizeModel) -> Vec<(SourceRule, SourceExpr)> {
    let mut steps = Vec::new();
    for (ctx, focus) in decompositions(e, model) {
        // Context rule: the focus is a subreduction redex.
        if let Some((reduced, sub)) = subreduce(&focus) {
            let rule = match sub {
                SubRule::Beta => SourceRule::Beta,
                SubRule::Select => SourceRule::Select,
                SubRule::Lift => SourceRule::Lift,
            };
            steps.push((rule, ctx.clone().plug(reduced)));
        }
        // Delta steps of the extension.
        if let Some(reduced) = delta_redex(&focus) {
            steps.push((SourceRule::Prim, ctx.clone().plug(reduced)));
        }
        match &focus {
            SourceExpr::Letrec(b1, inner) => {
                if ctx.frames.is_empty() {
                    match &ctx.top {
                        TopFrame::InBinding {
                            prefix,
                            var,
                            size,
                            rest,
                            body,
                        } => {
                            // Internal merge, discharging the freshness
                            // side condition first.
                            let mut forbidden = fv_defs(prefix);
                            forbidden.extend(fv_defs(rest));
                            forbidden.insert(var.clone());
                            forbidden.extend(free_vars(body));
                            let (b1, inner) =
                                rename_clashing(b1, inner, &forbidden);
                            let mut defs = prefix.clone();
                            defs.extend(b1.0);
                            defs.push(Definition {
                                var: var.clone(),
                                size: *size,
                                rhs: inner,
                            });
                            defs.extend(rest.iter().cloned());
                            steps.push((
                                SourceRule::IM,
                                SourceExpr::Letrec(
                                    SourceBinding(defs),
                                    alloc::boxed::Box::new(body.clone()),
                                ),
                            ));
                        }
                        TopFrame::UnderBinding { prefix } => {
                            // External merge.
                            let forbidden = fv_defs(prefix);
                            let (b1, inner) =
                                rename_clashing(b1, inner, &forbidden);
                            let mut defs = prefix.clone();
                            defs.extend(b1.0);
                            steps.push((
                                SourceRule::EM,
                                SourceExpr::Letrec(
                                    SourceBinding(defs),
                                    alloc::boxed::Box::new(inner),
                                ),
                            ));
                        }
                        TopFrame::Nested => {}
                    }
                }
            }
            SourceExpr::Var(x) => {
                if is_dereferencing(&ctx) {
                    if let Some(v) = lookup(&ctx, x) {
                        steps.push((SourceRule::Subst, ctx.clone().plug(v)));
                    }
                }
            }
            _ => {}
        }
    }
    steps
}

/// A decomposition's hole is dereferencing when its innermost frame forces
/// a value (everything except an argument position), or when it is a bare
/// known-size binding slot.
fn is_dereferencing(ctx: &SourceEvalContext) -> bool {
    match ctx.frames.last() {
        Some(f) => is_deref_frame(f),
        None => matches!(
            ctx.top,
            TopFrame::InBinding {
                size: SizeIndication::Known(_),
                ..
            }
        ),
    }
}

fn lookup(ctx: &SourceEvalContext, x: &Ident) -> Option<SourceExpr> {
    binding_of(ctx)
        .iter()
        .find(|d| &d.var == x)
        .map(|d| d.rhs.clone())
}

fn fv_defs(defs: &[Definition]) -> BTreeSet<Ident> {
    let mut fv = BTreeSet::new();
    for d in defs {
        fv.insert(d.var.clone());
        fv.extend(free_vars(&d.rhs));
    }
    fv
}

/// Renames binders of `b` that clash with `forbidden`, consistently across
/// the binding and `inner` (its recursive scope). The fresh names use a
/// `_e{n}` suffix, deliberately different from the evaluator's scheme so a
/// hidden dependence on concrete names would show up in the comparison.
fn rename_clashing(
    b: &SourceBinding,
    inner: &SourceExpr,
    forbidden: &BTreeSet<Ident>,
) -> (SourceBinding, SourceExpr) {
    let clashing: Vec<Ident> = b
        .0
        .iter()
        .map(|d| d.var.clone())
        .filter(|x| forbidden.contains(x))
        .collect();
    if clashing.is_empty() {
        return (b.clone(), inner.clone());
    }
    let mut avoid: BTreeSet<Ident> = forbidden.clone();
    avoid.extend(fv_defs(&b.0));
    avoid.extend(free_vars(inner));
    let mut rename = Substitution::new();
    let mut n = 0u32;
    for x in &clashing {
        let fresh = loop {
            n += 1;
            let candidate = Ident(alloc::format!("{}_e{n}", x.as_str()));
            if !avoid.contains(&candidate) {
                break candidate;
            }
        };
        avoid.insert(fresh.clone());
        rename.bind(x.clone(), SourceExpr::Var(fresh));
    }
    let defs = b
        .0
        .iter()
        .map(|d| {
            let var = match substitute(&rename, &SourceExpr::Var(d.var.clone())) {
                SourceExpr::Var(v) => v,
                _ => d.var.clone(),
            };
            Definition {
                var,
                size: d.size,
                rhs: substitute(&rename, &d.rhs),
            }
        })
        .collect();
    (SourceBinding(defs), substitute(&rename, inner))
}

/// A delta redex of the extension at the focus itself.
fn delta_redex(e: &SourceExpr) -> Option<SourceExpr> {
    use crate::names::PrimOp;
    match e {
        SourceExpr::Prim(op, l, r) if op.is_short_circuit() => match (op, l.as_ref()) {
            (PrimOp::And, SourceExpr::Bool(false)) => Some(SourceExpr::Bool(false)),
            (PrimOp::And, SourceExpr::Bool(true)) => Some((**r).clone()),
            (PrimOp::Or, SourceExpr::Bool(true)) => Some(SourceExpr::Bool(true)),
            (PrimOp::Or, SourceExpr::Bool(false)) => Some((**r).clone()),
            _ => None,
        },
        SourceExpr::Prim(op, l, r) => match (l.as_ref(), r.as_ref()) {
            (SourceExpr::Nat(a), SourceExpr::Nat(b)) => Some(match op {
                crate::names::PrimOp::Add => SourceExpr::Nat(a.saturating_add(*b)),
                crate::names::PrimOp::Sub => SourceExpr::Nat(a.saturating_sub(*b)),
                crate::names::PrimOp::Eq => SourceExpr::Bool(a == b),
                crate::names::PrimOp::Gt => SourceExpr::Bool(a > b),
                _ => return None,
            }),
            _ => None,
        },
        SourceExpr::If(c, t, f) => match c.as_ref() {
            SourceExpr::Bool(true) => Some((**t).clone()),
            SourceExpr::Bool(false) => Some((**f).clone()),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub enum DeterminismViolation {
    /// The enumeration found several distinct applicable reductions.
    Ambiguous {
        term: SourceExpr,
        count: usize,
    },
    /// The enumeration and the evaluator disagree about the step taken.
    Mismatch {
        term: SourceExpr,
        evaluator: Option<SourceExpr>,
        enumerated: Option<SourceExpr>,
    },
}

/// Follows the reduction of `e` for at most `steps` steps, checking at
/// every reachable term that exactly one reduction applies (modulo alpha)
/// and that it is the one the evaluator takes.
pub fn check_determinism(
    e: &SourceExpr,
    steps: usize,
    model: &SizeModel,
) -> Result<(), DeterminismViolation> {
    let mut cur = e.clone();
    for _ in 0..steps {
        let all = enumerate_steps(&cur, model);
        // Results must collapse to one modulo alpha.
        for window in all.windows(2) {
            if !alpha_equal(&window[0].1, &window[1].1) {
                return Err(DeterminismViolation::Ambiguous {
                    term: cur,
                    count: all.len(),
                });
            }
        }
        match reduce_step(&cur, model) {
            StepOutcome::Stepped(next, _) => {
                let Some((_, enumerated)) = all.first() else {
                    return Err(DeterminismViolation::Mismatch {
                        term: cur,
                        evaluator: Some(next),
                        enumerated: None,
                    });
                };
                if !alpha_equal(enumerated, &next) {
                    return Err(DeterminismViolation::Mismatch {
                        term: cur,
                        evaluator: Some(next),
                        enumerated: Some(enumerated.clone()),
                    });
                }
                cur = next;
            }
            StepOutcome::AnswerReached | StepOutcome::Stuck => {
                if let Some((_, enumerated)) = all.first() {
                    return Err(DeterminismViolation::Mismatch {
                        term: cur,
                        evaluator: None,
                        enumerated: Some(enumerated.clone()),
                    });
                }
                return Ok(());
            }
        }
    }
    Ok(())
}
