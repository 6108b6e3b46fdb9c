//! Free variables, capture-avoiding substitution, and alpha-equivalence.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::names::{fresh_ident, Ident};

use super::ast::{SourceBinding, SourceExpr};

/// Free variables. A `rec` binding has recursive scope: the whole domain of
/// the binding is removed from the free variables of both the definitions
/// and the body.
pub fn free_vars(e: &SourceExpr) -> BTreeSet<Ident> {
    let mut acc = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut acc);
    acc
}

fn collect_free(e: &SourceExpr, bound: &mut Vec<Ident>, acc: &mut BTreeSet<Ident>) {
    match e {
        SourceExpr::Var(x) => {
            if !bound.contains(x) {
                acc.insert(x.clone());
            }
        }
        SourceExpr::Lam(x, body) => {
            bound.push(x.clone());
            collect_free(body, bound, acc);
            bound.pop();
        }
        SourceExpr::App(f, a) => {
            collect_free(f, bound, acc);
            collect_free(a, bound, acc);
        }
        SourceExpr::Record(row) => {
            for (_, x) in row {
                if !bound.contains(x) {
                    acc.insert(x.clone());
                }
            }
        }
        SourceExpr::Select(s, _) => collect_free(s, bound, acc),
        SourceExpr::Letrec(b, body) => {
            let n = b.0.len();
            for d in &b.0 {
                bound.push(d.var.clone());
            }
            for d in &b.0 {
                collect_free(&d.rhs, bound, acc);
            }
            collect_free(body, bound, acc);
            bound.truncate(bound.len() - n);
        }
        SourceExpr::Nat(_) | SourceExpr::Bool(_) => {}
        SourceExpr::Prim(_, l, r) => {
            collect_free(l, bound, acc);
            collect_free(r, bound, acc);
        }
        SourceExpr::If(c, t, e2) => {
            collect_free(c, bound, acc);
            collect_free(t, bound, acc);
            collect_free(e2, bound, acc);
        }
    }
}

/// A simultaneous substitution with finite support.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    map: BTreeMap<Ident, SourceExpr>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution {
            map: BTreeMap::new(),
        }
    }

    pub fn single(x: Ident, e: SourceExpr) -> Self {
        let mut s = Self::new();
        s.bind(x, e);
        s
    }

    pub fn bind(&mut self, x: Ident, e: SourceExpr) {
        if e == SourceExpr::Var(x.clone()) {
            self.map.remove(&x);
        } else {
            self.map.insert(x, e);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn without(&self, vars: &[&Ident]) -> Substitution {
        let mut s = self.clone();
        for v in vars {
            s.map.remove(v);
        }
        s
    }

    fn free_vars_of_range(&self) -> BTreeSet<Ident> {
        let mut acc = BTreeSet::new();
        for e in self.map.values() {
            acc.extend(free_vars(e));
        }
        acc
    }
}

/// Capture-avoiding simultaneous substitution.
///
/// Binders that would capture a free variable of the substitution range are
/// renamed with a primed fresh name first. Record fields hold bare
/// variables, so a substitution mapping such a variable to a non-variable
/// value cannot be applied there; the caller must guarantee this does not
/// happen (the evaluator only substitutes values for variables in positions
/// where this is safe, and renamings are total on variables).
pub fn substitute(sub: &Substitution, e: &SourceExpr) -> SourceExpr {
    if sub.is_empty() {
        return e.clone();
    }
    match e {
        SourceExpr::Var(x) => match sub.map.get(x) {
            Some(v) => v.clone(),
            None => e.clone(),
        },
        SourceExpr::Lam(x, body) => {
            let inner = sub.without(&[x]);
            if inner.is_empty() {
                return e.clone();
            }
            let range_fv = inner.free_vars_of_range();
            if range_fv.contains(x) {
                let mut avoid: BTreeSet<Ident> = range_fv;
                avoid.extend(free_vars(body));
                let x2 = fresh_ident(x, &avoid);
                let renamed = substitute(
                    &Substitution::single(x.clone(), SourceExpr::Var(x2.clone())),
                    body,
                );
                SourceExpr::Lam(x2, Box::new(substitute(&inner, &renamed)))
            } else {
                SourceExpr::Lam(x.clone(), Box::new(substitute(&inner, body)))
            }
        }
        SourceExpr::App(f, a) => SourceExpr::app(substitute(sub, f), substitute(sub, a)),
        SourceExpr::Record(row) => SourceExpr::Record(
            row.iter()
                .map(|(fld, x)| {
                    let x2 = match sub.map.get(x) {
                        Some(SourceExpr::Var(y)) => y.clone(),
                        Some(_) => x.clone(),
                        None => x.clone(),
                    };
                    (fld.clone(), x2)
                })
                .collect(),
        ),
        SourceExpr::Select(s, fld) => {
            SourceExpr::Select(Box::new(substitute(sub, s)), fld.clone())
        }
        SourceExpr::Letrec(b, body) => {
            let dom: Vec<&Ident> = b.0.iter().map(|d| &d.var).collect();
            let inner = sub.without(&dom);
            if inner.is_empty() {
                return e.clone();
            }
            let range_fv = inner.free_vars_of_range();
            let clashing: Vec<Ident> = b
                .0
                .iter()
                .map(|d| d.var.clone())
                .filter(|x| range_fv.contains(x))
                .collect();
            if clashing.is_empty() {
                let defs = b
                    .0
                    .iter()
                    .map(|d| super::ast::Definition {
                        var: d.var.clone(),
                        size: d.size,
                        rhs: substitute(&inner, &d.rhs),
                    })
                    .collect();
                SourceExpr::Letrec(SourceBinding(defs), Box::new(substitute(&inner, body)))
            } else {
                let mut avoid: BTreeSet<Ident> = range_fv;
                avoid.extend(free_vars(e));
                for d in &b.0 {
                    avoid.insert(d.var.clone());
                    avoid.extend(free_vars(&d.rhs));
                }
                avoid.extend(free_vars(body));
                let mut rename = Substitution::new();
                for x in &clashing {
                    let x2 = fresh_ident(x, &avoid);
                    avoid.insert(x2.clone());
                    rename.bind(x.clone(), SourceExpr::Var(x2));
                }
                let renamed = rename_binding_and_body(b, body, &rename);
                substitute(&inner, &renamed)
            }
        }
        SourceExpr::Nat(_) | SourceExpr::Bool(_) => e.clone(),
        SourceExpr::Prim(op, l, r) => SourceExpr::Prim(
            *op,
            Box::new(substitute(sub, l)),
            Box::new(substitute(sub, r)),
        ),
        SourceExpr::If(c, t, e2) => SourceExpr::If(
            Box::new(substitute(sub, c)),
            Box::new(substitute(sub, t)),
            Box::new(substitute(sub, e2)),
        ),
    }
}

/// Renames binders of `b` (and their occurrences throughout the binding and
/// `body`, which are all in the binders' scope) according to `rename`,
/// rebuilding the letrec node.
fn rename_binding_and_body(
    b: &SourceBinding,
    body: &SourceExpr,
    rename: &Substitution,
) -> SourceExpr {
    let defs = b
        .0
        .iter()
        .map(|d| {
            let var = match substitute(rename, &SourceExpr::Var(d.var.clone())) {
                SourceExpr::Var(v) => v,
                _ => d.var.clone(),
            };
            super::ast::Definition {
                var,
                size: d.size,
                rhs: substitute(rename, &d.rhs),
            }
        })
        .collect();
    SourceExpr::Letrec(SourceBinding(defs), Box::new(substitute(rename, body)))
}

/// Alpha-equivalence: equality up to renaming of lambda and letrec binders.
/// Field names, free variables, binding order, and size indications are all
/// rigid.
pub fn alpha_equal(e1: &SourceExpr, e2: &SourceExpr) -> bool {
    alpha_eq(e1, e2, &mut Vec::new())
}

/// Pairs of corresponding binders, innermost last.
type BinderStack = Vec<(Ident, Ident)>;

fn var_eq(x: &Ident, y: &Ident, stack: &BinderStack) -> bool {
    for (a, b) in stack.iter().rev() {
        match (a == x, b == y) {
            (true, true) => return true,
            (false, false) => continue,
            _ => return false,
        }
    }
    x == y
}

fn alpha_eq(e1: &SourceExpr, e2: &SourceExpr, stack: &mut BinderStack) -> bool {
    match (e1, e2) {
        (SourceExpr::Var(x), SourceExpr::Var(y)) => var_eq(x, y, stack),
        (SourceExpr::Lam(x, b1), SourceExpr::Lam(y, b2)) => {
            stack.push((x.clone(), y.clone()));
            let r = alpha_eq(b1, b2, stack);
            stack.pop();
            r
        }
        (SourceExpr::App(f1, a1), SourceExpr::App(f2, a2)) => {
            alpha_eq(f1, f2, stack) && alpha_eq(a1, a2, stack)
        }
        (SourceExpr::Record(r1), SourceExpr::Record(r2)) => {
            r1.len() == r2.len()
                && r1
                    .iter()
                    .zip(r2)
                    .all(|((f1, x), (f2, y))| f1 == f2 && var_eq(x, y, stack))
        }
        (SourceExpr::Select(s1, f1), SourceExpr::Select(s2, f2)) => {
            f1 == f2 && alpha_eq(s1, s2, stack)
        }
        (SourceExpr::Letrec(b1, e1b), SourceExpr::Letrec(b2, e2b)) => {
            if b1.0.len() != b2.0.len() {
                return false;
            }
            let n = b1.0.len();
            for (d1, d2) in b1.0.iter().zip(&b2.0) {
                if d1.size != d2.size {
                    return false;
                }
                stack.push((d1.var.clone(), d2.var.clone()));
            }
            let ok = b1
                .0
                .iter()
                .zip(&b2.0)
                .all(|(d1, d2)| alpha_eq(&d1.rhs, &d2.rhs, stack))
                && alpha_eq(e1b, e2b, stack);
            stack.truncate(stack.len() - n);
            ok
        }
        (SourceExpr::Nat(a), SourceExpr::Nat(b)) => a == b,
        (SourceExpr::Bool(a), SourceExpr::Bool(b)) => a == b,
        (SourceExpr::Prim(o1, l1, r1), SourceExpr::Prim(o2, l2, r2)) => {
            o1 == o2 && alpha_eq(l1, l2, stack) && alpha_eq(r1, r2, stack)
        }
        (SourceExpr::If(c1, t1, f1), SourceExpr::If(c2, t2, f2)) => {
            alpha_eq(c1, c2, stack) && alpha_eq(t1, t2, stack) && alpha_eq(f1, f2, stack)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::ast::Definition;

    fn v(s: &str) -> SourceExpr {
        SourceExpr::var(s)
    }

    #[test]
    fn fv_of_closed_lambda_is_empty() {
        assert!(free_vars(&SourceExpr::lam("x", v("x"))).is_empty());
    }

    #[test]
    fn fv_of_letrec_subtracts_domain() {
        // rec x =? y in x  has free variables {y}
        let e = SourceExpr::letrec(vec![Definition::unknown("x", v("y"))], v("x"));
        let fv = free_vars(&e);
        assert_eq!(fv.len(), 1);
        assert!(fv.contains(&Ident::from("y")));
    }

    #[test]
    fn fv_of_record_row() {
        let e = SourceExpr::Record(vec![(crate::names::FieldName::from("X"), Ident::from("x"))]);
        assert!(free_vars(&e).contains(&Ident::from("x")));
    }

    #[test]
    fn substitute_free_occurrence() {
        // [x -> y](x z) = y z
        let sub = Substitution::single(Ident::from("x"), v("y"));
        let e = SourceExpr::app(v("x"), v("z"));
        assert_eq!(substitute(&sub, &e), SourceExpr::app(v("y"), v("z")));
    }

    #[test]
    fn substitute_respects_shadowing() {
        // [x -> y](\x. x) = \x. x
        let sub = Substitution::single(Ident::from("x"), v("y"));
        let e = SourceExpr::lam("x", v("x"));
        assert_eq!(substitute(&sub, &e), e);
    }

    #[test]
    fn substitute_avoids_capture() {
        // [x -> y](\y. x) = \y'. y  for a fresh y'
        let sub = Substitution::single(Ident::from("x"), v("y"));
        let e = SourceExpr::lam("y", v("x"));
        let r = substitute(&sub, &e);
        match r {
            SourceExpr::Lam(binder, body) => {
                assert_ne!(binder, Ident::from("y"));
                assert_eq!(*body, v("y"));
            }
            other => panic!("expected a lambda, got {other:?}"),
        }
    }

    #[test]
    fn alpha_renames_lambda_binders() {
        assert!(alpha_equal(
            &SourceExpr::lam("x", v("x")),
            &SourceExpr::lam("y", v("y"))
        ));
    }

    #[test]
    fn alpha_keeps_fields_rigid() {
        let r1 = SourceExpr::Record(vec![(crate::names::FieldName::from("X"), Ident::from("x"))]);
        let r2 = SourceExpr::Record(vec![(crate::names::FieldName::from("Y"), Ident::from("x"))]);
        assert!(!alpha_equal(&r1, &r2));
    }

    #[test]
    fn alpha_renames_letrec_binders() {
        let e1 = SourceExpr::letrec(
            vec![Definition::unknown("x", SourceExpr::lam("a", v("a")))],
            v("x"),
        );
        let e2 = SourceExpr::letrec(
            vec![Definition::unknown("z", SourceExpr::lam("a", v("a")))],
            v("z"),
        );
        assert!(alpha_equal(&e1, &e2));
    }

    #[test]
    fn alpha_distinguishes_free_variables() {
        assert!(!alpha_equal(&v("x"), &v("y")));
    }

    #[test]
    fn alpha_shadowing_is_positional() {
        // \x.\y.x vs \a.\a.a: outer binders differ in use
        let e1 = SourceExpr::lam("x", SourceExpr::lam("y", v("x")));
        let e2 = SourceExpr::lam("a", SourceExpr::lam("a", v("a")));
        assert!(!alpha_equal(&e1, &e2));
    }
}
