//! Small-step evaluation for the source calculus.
//!
//! Evaluation is staged: bindings are only ever evaluated at the top level
//! of the term. Inner `rec` nodes are lifted up through lift contexts and
//! merged into the top-level binding (internally, when they appear as the
//! next definition to evaluate; externally, when they appear as the body).
//! Variables are substituted one occurrence at a time, at destruct time:
//! when they sit in function position of an application with an evaluated
//! argument, under a selection, at a known-size binding slot, or (with the
//! extension) at a primitive operand that needs a literal.
//!
//! Function applications evaluate right to left. Within the top-level
//! binding, evaluation advances past a definition once it holds a value the
//! slot accepts: unknown-size slots accept any value, known-size slots only
//! a non-variable value of exactly the indicated size.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::names::{fresh_ident, FieldName, Ident, PrimOp};
use crate::sizing::{respects_size, SizeModel};

use super::ast::{Definition, SizeIndication, SourceBinding, SourceExpr};
use super::subst::{free_vars, substitute, Substitution};

/// One lift-context frame. The hole is written `[]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftFrame {
    /// `e []`: evaluating the argument, the function part still pending.
    AppRight { func: SourceExpr },
    /// `[] v`: evaluating the function, the argument already a value.
    AppLeft { arg: SourceExpr },
    /// `[].X`
    Select { field: FieldName },
    /// `e ⊕ []`: strict operator, evaluating the right operand first.
    PrimRight { op: PrimOp, left: SourceExpr },
    /// `[] ⊕ v`: strict operator, right operand already a value.
    PrimLeft { op: PrimOp, right: SourceExpr },
    /// `[] ⊕ e`: short-circuit operator, left operand first.
    ShortCircuitLeft { op: PrimOp, right: SourceExpr },
    /// `if [] then e1 else e2`
    IfCond {
        then_branch: SourceExpr,
        else_branch: SourceExpr,
    },
}

impl LiftFrame {
    /// Free variables of the frame, the set the Lift rule must not capture.
    fn free_vars(&self) -> BTreeSet<Ident> {
        match self {
            LiftFrame::AppRight { func } => free_vars(func),
            LiftFrame::AppLeft { arg } => free_vars(arg),
            LiftFrame::Select { .. } => BTreeSet::new(),
            LiftFrame::PrimRight { left, .. } => free_vars(left),
            LiftFrame::PrimLeft { right, .. } => free_vars(right),
            LiftFrame::ShortCircuitLeft { right, .. } => free_vars(right),
            LiftFrame::IfCond {
                then_branch,
                else_branch,
            } => {
                let mut fv = free_vars(then_branch);
                fv.extend(free_vars(else_branch));
                fv
            }
        }
    }

    fn plug(self, e: SourceExpr) -> SourceExpr {
        match self {
            LiftFrame::AppRight { func } => SourceExpr::App(Box::new(func), Box::new(e)),
            LiftFrame::AppLeft { arg } => SourceExpr::App(Box::new(e), Box::new(arg)),
            LiftFrame::Select { field } => SourceExpr::Select(Box::new(e), field),
            LiftFrame::PrimRight { op, left } => {
                SourceExpr::Prim(op, Box::new(left), Box::new(e))
            }
            LiftFrame::PrimLeft { op, right } => {
                SourceExpr::Prim(op, Box::new(e), Box::new(right))
            }
            LiftFrame::ShortCircuitLeft { op, right } => {
                SourceExpr::Prim(op, Box::new(e), Box::new(right))
            }
            LiftFrame::IfCond {
                then_branch,
                else_branch,
            } => SourceExpr::If(Box::new(e), Box::new(then_branch), Box::new(else_branch)),
        }
    }

    /// Whether a variable in the hole must be replaced by its value for
    /// evaluation to proceed.
    fn is_dereferencing(&self) -> bool {
        match self {
            LiftFrame::AppLeft { .. }
            | LiftFrame::Select { .. }
            | LiftFrame::PrimRight { .. }
            | LiftFrame::PrimLeft { .. }
            | LiftFrame::ShortCircuitLeft { .. }
            | LiftFrame::IfCond { .. } => true,
            LiftFrame::AppRight { .. } => false,
        }
    }
}

/// Where the nested lift context sits relative to the top-level binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopFrame {
    /// No top-level binding around the context.
    Nested,
    /// `rec bv in F`: the whole binding is evaluated, focus in the body.
    UnderBinding { prefix: Vec<Definition> },
    /// `rec bv, x =i F, b in e`: focus in the first unevaluated definition.
    InBinding {
        prefix: Vec<Definition>,
        var: Ident,
        size: SizeIndication,
        rest: Vec<Definition>,
        body: SourceExpr,
    },
}

/// An evaluation context: a top-level frame plus a stack of lift frames,
/// outermost first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceEvalContext {
    pub top: TopFrame,
    pub frames: Vec<LiftFrame>,
}

impl SourceEvalContext {
    /// The evaluated binding prefix this context exposes for substitution.
    fn binding(&self) -> &[Definition] {
        match &self.top {
            TopFrame::Nested => &[],
            TopFrame::UnderBinding { prefix } => prefix,
            TopFrame::InBinding { prefix, .. } => prefix,
        }
    }

    pub fn plug(self, focus: SourceExpr) -> SourceExpr {
        let mut e = focus;
        for frame in self.frames.into_iter().rev() {
            e = frame.plug(e);
        }
        match self.top {
            TopFrame::Nested => e,
            TopFrame::UnderBinding { prefix } => {
                SourceExpr::Letrec(SourceBinding(prefix), Box::new(e))
            }
            TopFrame::InBinding {
                prefix,
                var,
                size,
                rest,
                body,
            } => {
                let mut defs = prefix;
                defs.push(Definition {
                    var,
                    size,
                    rhs: e,
                });
                defs.extend(rest);
                SourceExpr::Letrec(SourceBinding(defs), Box::new(body))
            }
        }
    }
}

/// A maximal decomposition: plugging `focus` back into `context` restores
/// the original term. The focus is always either a value that the context
/// cannot advance past, or an inner `rec` waiting to be lifted or merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub context: SourceEvalContext,
    pub focus: SourceExpr,
}

/// The term is an answer; there is nothing to decompose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoRedex;

/// Finds the maximal decomposition of `e`: descend into the first
/// non-advancing definition of the top-level binding (or its body once all
/// definitions are in place), then turn left in applications whenever the
/// argument side is a value.
pub fn decompose(e: &SourceExpr, model: &SizeModel) -> Result<Decomposition, NoRedex> {
    decompose_owned(e.clone(), model)
}

fn decompose_owned(e: SourceExpr, model: &SizeModel) -> Result<Decomposition, NoRedex> {
    match e {
        SourceExpr::Letrec(SourceBinding(defs), body) => {
            let mut prefix: Vec<Definition> = Vec::new();
            let mut iter = defs.into_iter();
            while let Some(d) = iter.next() {
                if respects_size(model, d.size, &d.rhs) {
                    prefix.push(d);
                    continue;
                }
                let top = TopFrame::InBinding {
                    prefix,
                    var: d.var,
                    size: d.size,
                    rest: iter.collect(),
                    body: *body,
                };
                return Ok(descend(d.rhs, top, Vec::new()));
            }
            if body.is_value() {
                return Err(NoRedex);
            }
            Ok(descend(*body, TopFrame::UnderBinding { prefix }, Vec::new()))
        }
        e if e.is_value() => Err(NoRedex),
        e => Ok(descend(e, TopFrame::Nested, Vec::new())),
    }
}

fn descend(e: SourceExpr, top: TopFrame, mut frames: Vec<LiftFrame>) -> Decomposition {
    let mut cur = e;
    loop {
        match cur {
            v if v.is_value() => {
                return Decomposition {
                    context: SourceEvalContext { top, frames },
                    focus: v,
                }
            }
            SourceExpr::Letrec(..) => {
                return Decomposition {
                    context: SourceEvalContext { top, frames },
                    focus: cur,
                }
            }
            SourceExpr::App(f, a) => {
                if a.is_value() {
                    frames.push(LiftFrame::AppLeft { arg: *a });
                    cur = *f;
                } else {
                    frames.push(LiftFrame::AppRight { func: *f });
                    cur = *a;
                }
            }
            SourceExpr::Select(s, field) => {
                frames.push(LiftFrame::Select { field });
                cur = *s;
            }
            SourceExpr::Prim(op, l, r) if op.is_short_circuit() => {
                frames.push(LiftFrame::ShortCircuitLeft { op, right: *r });
                cur = *l;
            }
            SourceExpr::Prim(op, l, r) => {
                // Right to left: the right operand is evaluated (and, if it
                // is a variable, dereferenced) before the left one.
                if !r.is_value() || matches!(*r, SourceExpr::Var(_)) {
                    frames.push(LiftFrame::PrimRight { op, left: *l });
                    cur = *r;
                } else {
                    frames.push(LiftFrame::PrimLeft { op, right: *r });
                    cur = *l;
                }
            }
            SourceExpr::If(c, t, f) => {
                frames.push(LiftFrame::IfCond {
                    then_branch: *t,
                    else_branch: *f,
                });
                cur = *c;
            }
            SourceExpr::Var(_)
            | SourceExpr::Lam(..)
            | SourceExpr::Record(_)
            | SourceExpr::Nat(_)
            | SourceExpr::Bool(_) => unreachable!("values are handled above"),
        }
    }
}

/// Looks up the value of `x` exposed by the context: the definition of `x`
/// in the evaluated prefix of the top-level binding, if any. `None` is a
/// normal outcome, not a failure; it makes a dereference of `x` stuck.
pub fn lookup_context(ctx: &SourceEvalContext, x: &Ident) -> Option<SourceExpr> {
    ctx.binding()
        .iter()
        .find(|d| &d.var == x)
        .map(|d| d.rhs.clone())
}

/// The three subreduction rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubRule {
    Beta,
    Select,
    Lift,
}

/// Applies one subreduction at the root of `e`, if its shape matches:
/// record selection, application of an abstraction to a value, or lifting
/// of a `rec` node out of a lift context. `None` if no rule applies.
pub fn subreduce(e: &SourceExpr) -> Option<(SourceExpr, SubRule)> {
    match e {
        SourceExpr::Select(s, field) => match s.as_ref() {
            SourceExpr::Record(row) => {
                let var = row.iter().find(|(f, _)| f == field)?;
                Some((SourceExpr::Var(var.1.clone()), SubRule::Select))
            }
            SourceExpr::Letrec(b, inner) => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::Select {
                        field: field.clone(),
                    },
                ),
                SubRule::Lift,
            )),
            _ => None,
        },
        SourceExpr::App(f, a) => match (f.as_ref(), a.as_ref()) {
            (SourceExpr::Lam(x, body), v) if v.is_value() => {
                Some((beta(x, body, v.clone()), SubRule::Beta))
            }
            (f_any, SourceExpr::Letrec(b, inner)) => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::AppRight {
                        func: f_any.clone(),
                    },
                ),
                SubRule::Lift,
            )),
            (SourceExpr::Letrec(b, inner), v) if v.is_value() => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::AppLeft { arg: v.clone() },
                ),
                SubRule::Lift,
            )),
            _ => None,
        },
        SourceExpr::Prim(op, l, r) if op.is_short_circuit() => match l.as_ref() {
            SourceExpr::Letrec(b, inner) => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::ShortCircuitLeft {
                        op: *op,
                        right: (**r).clone(),
                    },
                ),
                SubRule::Lift,
            )),
            _ => None,
        },
        SourceExpr::Prim(op, l, r) => match (l.as_ref(), r.as_ref()) {
            (l_any, SourceExpr::Letrec(b, inner)) => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::PrimRight {
                        op: *op,
                        left: l_any.clone(),
                    },
                ),
                SubRule::Lift,
            )),
            (SourceExpr::Letrec(b, inner), v) if v.is_value() => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::PrimLeft {
                        op: *op,
                        right: v.clone(),
                    },
                ),
                SubRule::Lift,
            )),
            _ => None,
        },
        SourceExpr::If(c, t, f) => match c.as_ref() {
            SourceExpr::Letrec(b, inner) => Some((
                lift(
                    b.clone(),
                    (**inner).clone(),
                    LiftFrame::IfCond {
                        then_branch: (**t).clone(),
                        else_branch: (**f).clone(),
                    },
                ),
                SubRule::Lift,
            )),
            _ => None,
        },
        _ => None,
    }
}

/// `(\x. body) v  ~>  rec x =? v in body`, renaming `x` if it occurs free
/// in `v`.
fn beta(x: &Ident, body: &SourceExpr, arg: SourceExpr) -> SourceExpr {
    let arg_fv = free_vars(&arg);
    let (binder, body) = if arg_fv.contains(x) {
        let mut avoid = arg_fv;
        avoid.extend(free_vars(body));
        let x2 = fresh_ident(x, &avoid);
        let body2 = substitute(
            &Substitution::single(x.clone(), SourceExpr::Var(x2.clone())),
            body,
        );
        (x2, body2)
    } else {
        (x.clone(), body.clone())
    };
    SourceExpr::Letrec(
        SourceBinding(alloc::vec![Definition {
            var: binder,
            size: SizeIndication::Unknown,
            rhs: arg,
        }]),
        Box::new(body),
    )
}

/// `L[rec b in e]  ~>  rec b in L[e]`, renaming binders of `b` that occur
/// free in `L`.
fn lift(b: SourceBinding, inner: SourceExpr, frame: LiftFrame) -> SourceExpr {
    let (b, inner) = rename_binders_away(b, inner, &frame.free_vars());
    SourceExpr::Letrec(b.clone(), Box::new(frame.plug(inner)))
}

/// Free variables of a binding viewed on its own: the binders themselves
/// plus the free variables of every right-hand side, with no subtraction.
fn fv_binding(defs: &[Definition]) -> BTreeSet<Ident> {
    let mut fv = BTreeSet::new();
    for d in defs {
        fv.insert(d.var.clone());
        fv.extend(free_vars(&d.rhs));
    }
    fv
}

/// Renames the binders of `b` (consistently through all right-hand sides
/// and `scope`, which are in their recursive scope) so that none of them
/// lies in `forbidden`.
fn rename_binders_away(
    b: SourceBinding,
    scope: SourceExpr,
    forbidden: &BTreeSet<Ident>,
) -> (SourceBinding, SourceExpr) {
    let clashing: Vec<Ident> = b
        .0
        .iter()
        .map(|d| d.var.clone())
        .filter(|x| forbidden.contains(x))
        .collect();
    if clashing.is_empty() {
        return (b, scope);
    }
    let mut avoid = forbidden.clone();
    avoid.extend(fv_binding(&b.0));
    avoid.extend(free_vars(&scope));
    let mut rename = Substitution::new();
    for x in &clashing {
        let x2 = fresh_ident(x, &avoid);
        avoid.insert(x2.clone());
        rename.bind(x.clone(), SourceExpr::Var(x2));
    }
    let defs = b
        .0
        .into_iter()
        .map(|d| {
            let var = match substitute(&rename, &SourceExpr::Var(d.var.clone())) {
                SourceExpr::Var(v) => v,
                _ => d.var,
            };
            Definition {
                var,
                size: d.size,
                rhs: substitute(&rename, &d.rhs),
            }
        })
        .collect();
    (SourceBinding(defs), substitute(&rename, &scope))
}

/// Reduction rule names as they appear in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceRule {
    Beta,
    Select,
    Lift,
    IM,
    EM,
    Subst,
    /// Delta step of the arithmetic extension (operators and `if`).
    Prim,
}

impl fmt::Display for SourceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SourceRule::Beta => "Beta",
            SourceRule::Select => "Select",
            SourceRule::Lift => "Lift",
            SourceRule::IM => "IM",
            SourceRule::EM => "EM",
            SourceRule::Subst => "Subst",
            SourceRule::Prim => "Prim",
        };
        f.write_str(s)
    }
}

/// How a stuck term fails. The first five cases are the core calculus;
/// the last three only arise with the arithmetic extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceFault {
    /// A variable in dereferencing position with no value in the context.
    UndefinedVariableDeref,
    /// A known-size slot holds a non-variable value of the wrong (or no)
    /// size.
    SizeMismatch,
    RecordApplied,
    MissingField,
    FunctionSelected,
    LiteralApplied,
    LiteralSelected,
    PrimArgMismatch,
}

impl fmt::Display for SourceFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SourceFault::UndefinedVariableDeref => "UndefinedVariableDeref",
            SourceFault::SizeMismatch => "SizeMismatch",
            SourceFault::RecordApplied => "RecordApplied",
            SourceFault::MissingField => "MissingField",
            SourceFault::FunctionSelected => "FunctionSelected",
            SourceFault::LiteralApplied => "LiteralApplied",
            SourceFault::LiteralSelected => "LiteralSelected",
            SourceFault::PrimArgMismatch => "PrimArgMismatch",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped(SourceExpr, SourceRule),
    AnswerReached,
    Stuck,
}

enum Analysis {
    Step(SourceExpr, SourceRule),
    Answer,
    Stuck(SourceFault),
}

fn analyze(e: &SourceExpr, model: &SizeModel) -> Analysis {
    let Ok(Decomposition { context, focus }) = decompose_owned(e.clone(), model) else {
        return Analysis::Answer;
    };
    let SourceEvalContext { top, mut frames } = context;

    if let SourceExpr::Letrec(b1, inner) = focus {
        return match frames.pop() {
            Some(frame) => {
                let lifted = lift(b1, *inner, frame);
                let ctx = SourceEvalContext { top, frames };
                Analysis::Step(ctx.plug(lifted), SourceRule::Lift)
            }
            None => match top {
                TopFrame::InBinding {
                    prefix,
                    var,
                    size,
                    rest,
                    body,
                } => {
                    // rec bv, x =i (rec b1 in e1), b2 in e'
                    //   ~> rec bv, b1, x =i e1, b2 in e'
                    let mut forbidden = fv_binding(&prefix);
                    forbidden.extend(fv_binding(&rest));
                    forbidden.insert(var.clone());
                    forbidden.extend(free_vars(&body));
                    let (b1, inner) = rename_binders_away(b1, *inner, &forbidden);
                    let mut defs = prefix;
                    defs.extend(b1.0);
                    defs.push(Definition {
                        var,
                        size,
                        rhs: inner,
                    });
                    defs.extend(rest);
                    Analysis::Step(
                        SourceExpr::Letrec(SourceBinding(defs), Box::new(body)),
                        SourceRule::IM,
                    )
                }
                TopFrame::UnderBinding { prefix } => {
                    // rec bv in (rec b in e)  ~>  rec bv, b in e
                    let forbidden = fv_binding(&prefix);
                    let (b1, inner) = rename_binders_away(b1, *inner, &forbidden);
                    let mut defs = prefix;
                    defs.extend(b1.0);
                    Analysis::Step(
                        SourceExpr::Letrec(SourceBinding(defs), Box::new(inner)),
                        SourceRule::EM,
                    )
                }
                TopFrame::Nested => {
                    unreachable!("a root letrec is entered by decompose, not focused")
                }
            },
        };
    }

    // The focus is a value.
    let ctx = SourceEvalContext {
        top,
        frames: frames.clone(),
    };
    match frames.last() {
        Some(frame) => {
            if let SourceExpr::Var(x) = &focus {
                if frame.is_dereferencing() {
                    return match lookup_context(&ctx, x) {
                        Some(v) => Analysis::Step(ctx.plug(v), SourceRule::Subst),
                        None => Analysis::Stuck(SourceFault::UndefinedVariableDeref),
                    };
                }
                unreachable!("non-dereferencing frames never hold a value focus");
            }
            match frame.clone() {
                LiftFrame::AppLeft { arg } => match focus {
                    SourceExpr::Lam(x, body) => {
                        let reduced = beta(&x, &body, arg);
                        let mut ctx = ctx;
                        ctx.frames.pop();
                        Analysis::Step(ctx.plug(reduced), SourceRule::Beta)
                    }
                    SourceExpr::Record(_) => Analysis::Stuck(SourceFault::RecordApplied),
                    SourceExpr::Nat(_) | SourceExpr::Bool(_) => {
                        Analysis::Stuck(SourceFault::LiteralApplied)
                    }
                    _ => unreachable!(),
                },
                LiftFrame::Select { field } => match focus {
                    SourceExpr::Record(row) => {
                        match row.iter().find(|(f, _)| *f == field) {
                            Some((_, y)) => {
                                let mut ctx = ctx;
                                ctx.frames.pop();
                                Analysis::Step(
                                    ctx.plug(SourceExpr::Var(y.clone())),
                                    SourceRule::Select,
                                )
                            }
                            None => Analysis::Stuck(SourceFault::MissingField),
                        }
                    }
                    SourceExpr::Lam(..) => Analysis::Stuck(SourceFault::FunctionSelected),
                    SourceExpr::Nat(_) | SourceExpr::Bool(_) => {
                        Analysis::Stuck(SourceFault::LiteralSelected)
                    }
                    _ => unreachable!(),
                },
                LiftFrame::PrimLeft { op, right } => {
                    let mut ctx = ctx;
                    ctx.frames.pop();
                    match delta(op, &focus, &right) {
                        Some(result) => Analysis::Step(ctx.plug(result), SourceRule::Prim),
                        None => Analysis::Stuck(SourceFault::PrimArgMismatch),
                    }
                }
                LiftFrame::PrimRight { .. } => {
                    // Only variables stop here, and those were handled above.
                    unreachable!("evaluated right operands move the focus left")
                }
                LiftFrame::ShortCircuitLeft { op, right } => {
                    let mut ctx = ctx;
                    ctx.frames.pop();
                    match (op, &focus) {
                        (PrimOp::And, SourceExpr::Bool(false)) => {
                            Analysis::Step(ctx.plug(SourceExpr::Bool(false)), SourceRule::Prim)
                        }
                        (PrimOp::And, SourceExpr::Bool(true)) => {
                            Analysis::Step(ctx.plug(right), SourceRule::Prim)
                        }
                        (PrimOp::Or, SourceExpr::Bool(true)) => {
                            Analysis::Step(ctx.plug(SourceExpr::Bool(true)), SourceRule::Prim)
                        }
                        (PrimOp::Or, SourceExpr::Bool(false)) => {
                            Analysis::Step(ctx.plug(right), SourceRule::Prim)
                        }
                        _ => Analysis::Stuck(SourceFault::PrimArgMismatch),
                    }
                }
                LiftFrame::IfCond {
                    then_branch,
                    else_branch,
                } => {
                    let mut ctx = ctx;
                    ctx.frames.pop();
                    match focus {
                        SourceExpr::Bool(true) => {
                            Analysis::Step(ctx.plug(then_branch), SourceRule::Prim)
                        }
                        SourceExpr::Bool(false) => {
                            Analysis::Step(ctx.plug(else_branch), SourceRule::Prim)
                        }
                        _ => Analysis::Stuck(SourceFault::PrimArgMismatch),
                    }
                }
                LiftFrame::AppRight { .. } => unreachable!(),
            }
        }
        None => match &ctx.top {
            TopFrame::InBinding {
                size: SizeIndication::Known(_),
                ..
            } => match &focus {
                SourceExpr::Var(x) => match lookup_context(&ctx, x) {
                    Some(v) => Analysis::Step(ctx.plug(v), SourceRule::Subst),
                    None => Analysis::Stuck(SourceFault::UndefinedVariableDeref),
                },
                _ => Analysis::Stuck(SourceFault::SizeMismatch),
            },
            _ => unreachable!("only known-size slots can refuse a value"),
        },
    }
}

/// Delta rules for the strict operators. Both operands must be literals of
/// the right type.
fn delta(op: PrimOp, l: &SourceExpr, r: &SourceExpr) -> Option<SourceExpr> {
    match (op, l, r) {
        (PrimOp::Add, SourceExpr::Nat(a), SourceExpr::Nat(b)) => {
            Some(SourceExpr::Nat(a.saturating_add(*b)))
        }
        // Truncated natural subtraction.
        (PrimOp::Sub, SourceExpr::Nat(a), SourceExpr::Nat(b)) => {
            Some(SourceExpr::Nat(a.saturating_sub(*b)))
        }
        (PrimOp::Eq, SourceExpr::Nat(a), SourceExpr::Nat(b)) => Some(SourceExpr::Bool(a == b)),
        (PrimOp::Gt, SourceExpr::Nat(a), SourceExpr::Nat(b)) => Some(SourceExpr::Bool(a > b)),
        _ => None,
    }
}

/// One top-level reduction step. Deterministic: the maximal decomposition
/// is unique and exactly one rule applies to it.
pub fn reduce_step(e: &SourceExpr, model: &SizeModel) -> StepOutcome {
    match analyze(e, model) {
        Analysis::Step(e2, rule) => StepOutcome::Stepped(e2, rule),
        Analysis::Answer => StepOutcome::AnswerReached,
        Analysis::Stuck(_) => StepOutcome::Stuck,
    }
}

/// Classifies a term in normal form that is not an answer.
///
/// Rejects answers and reducible terms with `Err`; otherwise reports the
/// unique failure case of the maximal decomposition.
pub fn classify_stuck(e: &SourceExpr, model: &SizeModel) -> Result<SourceFault, ClassifyError> {
    match analyze(e, model) {
        Analysis::Stuck(kind) => Ok(kind),
        Analysis::Answer => Err(ClassifyError::IsAnswer),
        Analysis::Step(..) => Err(ClassifyError::IsReducible),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifyError {
    IsAnswer,
    IsReducible,
}

/// Terminal state of a bounded run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceOutcome {
    /// A value, possibly under a size-respecting top-level binding.
    Answer(SourceExpr),
    Faulty {
        kind: SourceFault,
        witness: SourceExpr,
    },
    FuelExhausted {
        steps: u64,
        last: SourceExpr,
    },
}

impl SourceOutcome {
    pub fn is_answer(&self) -> bool {
        matches!(self, SourceOutcome::Answer(_))
    }

    pub fn is_faulty(&self) -> bool {
        matches!(self, SourceOutcome::Faulty { .. })
    }
}

/// Rule and resulting term of each step, in order.
pub type SourceTrace = Vec<(SourceRule, SourceExpr)>;

/// Runs `e` for at most `fuel` steps.
pub fn run_source(e: &SourceExpr, fuel: u64, model: &SizeModel) -> SourceOutcome {
    run_loop(e.clone(), fuel, model, &mut |_, _| {})
}

/// Like [`run_source`] but also returns the full trace. Prefer the untraced
/// variant for bulk runs; the trace owns a copy of every intermediate term.
pub fn run_source_traced(
    e: &SourceExpr,
    fuel: u64,
    model: &SizeModel,
) -> (SourceOutcome, SourceTrace) {
    let mut trace = Vec::new();
    let outcome = run_loop(e.clone(), fuel, model, &mut |rule, term| {
        trace.push((rule, term.clone()))
    });
    (outcome, trace)
}

fn run_loop(
    mut e: SourceExpr,
    fuel: u64,
    model: &SizeModel,
    observe: &mut dyn FnMut(SourceRule, &SourceExpr),
) -> SourceOutcome {
    for step in 0..fuel {
        match analyze(&e, model) {
            Analysis::Step(e2, rule) => {
                observe(rule, &e2);
                e = e2;
            }
            Analysis::Answer => return SourceOutcome::Answer(e),
            Analysis::Stuck(kind) => {
                return SourceOutcome::Faulty {
                    kind,
                    witness: e,
                };
            }
        }
        let _ = step;
    }
    SourceOutcome::FuelExhausted {
        steps: fuel,
        last: e,
    }
}
