//! Greedy structural shrinking of counterexample programs.
//!
//! Candidates are strictly smaller closed well-formed terms: a subterm
//! pulled to the root, a binding with one definition dropped, a letrec
//! replaced by its body, or a subterm replaced by the empty record. The
//! predicate (usually "still disagrees") is re-run on every candidate and
//! the first passing one is taken; shrinking stops at a local minimum.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::source::{check_wellformed, free_vars, SourceBinding, SourceExpr};

/// Shrinks `e` while `keep` holds. `keep(e)` must be true on entry.
pub fn shrink(e: &SourceExpr, keep: &mut dyn FnMut(&SourceExpr) -> bool) -> SourceExpr {
    let mut cur = e.clone();
    'outer: loop {
        for candidate in candidates(&cur) {
            if candidate.node_count() < cur.node_count() && acceptable(&candidate) && keep(&candidate)
            {
                cur = candidate;
                continue 'outer;
            }
        }
        return cur;
    }
}

fn acceptable(e: &SourceExpr) -> bool {
    free_vars(e).is_empty() && check_wellformed(e).is_empty()
}

fn candidates(e: &SourceExpr) -> Vec<SourceExpr> {
    let mut out = Vec::new();
    // Any closed subterm can replace the whole program.
    collect_subterms(e, &mut out);
    // Structural reductions at every position.
    rewrite_everywhere(e, &mut out);
    out
}

fn collect_subterms(e: &SourceExpr, out: &mut Vec<SourceExpr>) {
    match e {
        SourceExpr::Lam(_, b) => {
            out.push((**b).clone());
            collect_subterms(b, out);
        }
        SourceExpr::App(f, a) => {
            out.push((**f).clone());
            out.push((**a).clone());
            collect_subterms(f, out);
            collect_subterms(a, out);
        }
        SourceExpr::Select(s, _) => {
            out.push((**s).clone());
            collect_subterms(s, out);
        }
        SourceExpr::Letrec(b, body) => {
            out.push((**body).clone());
            for d in &b.0 {
                out.push(d.rhs.clone());
                collect_subterms(&d.rhs, out);
            }
            collect_subterms(body, out);
        }
        SourceExpr::Prim(_, l, r) => {
            out.push((**l).clone());
            out.push((**r).clone());
            collect_subterms(l, out);
            collect_subterms(r, out);
        }
        SourceExpr::If(c, t, f) => {
            for sub in [c, t, f] {
                out.push((**sub).clone());
                collect_subterms(sub, out);
            }
        }
        _ => {}
    }
}

/// One-rewrite variants of `e`: at each position, drop a definition,
/// collapse a letrec to its body, or replace the subterm with `{}`.
fn rewrite_everywhere(e: &SourceExpr, out: &mut Vec<SourceExpr>) {
    if !matches!(e, SourceExpr::Record(row) if row.is_empty()) {
        out.push(SourceExpr::Record(Vec::new()));
    }
    match e {
        SourceExpr::Lam(x, b) => {
            for b2 in one_level(b) {
                out.push(SourceExpr::Lam(x.clone(), Box::new(b2)));
            }
        }
        SourceExpr::App(f, a) => {
            for f2 in one_level(f) {
                out.push(SourceExpr::app(f2, (**a).clone()));
            }
            for a2 in one_level(a) {
                out.push(SourceExpr::app((**f).clone(), a2));
            }
        }
        SourceExpr::Select(s, fld) => {
            for s2 in one_level(s) {
                out.push(SourceExpr::Select(Box::new(s2), fld.clone()));
            }
        }
        SourceExpr::Letrec(b, body) => {
            // Drop one definition.
            for i in 0..b.0.len() {
                let mut defs = b.0.clone();
                defs.remove(i);
                if defs.is_empty() {
                    out.push((**body).clone());
                } else {
                    out.push(SourceExpr::Letrec(
                        SourceBinding(defs),
                        body.clone(),
                    ));
                }
            }
            // Shrink inside.
            for (i, d) in b.0.iter().enumerate() {
                for rhs2 in one_level(&d.rhs) {
                    let mut defs = b.0.clone();
                    defs[i].rhs = rhs2;
                    out.push(SourceExpr::Letrec(SourceBinding(defs), body.clone()));
                }
            }
            for body2 in one_level(body) {
                out.push(SourceExpr::Letrec(b.clone(), Box::new(body2)));
            }
        }
        SourceExpr::Prim(op, l, r) => {
            for l2 in one_level(l) {
                out.push(SourceExpr::Prim(*op, Box::new(l2), r.clone()));
            }
            for r2 in one_level(r) {
                out.push(SourceExpr::Prim(*op, l.clone(), Box::new(r2)));
            }
        }
        SourceExpr::If(c, t, f) => {
            for c2 in one_level(c) {
                out.push(SourceExpr::If(Box::new(c2), t.clone(), f.clone()));
            }
            for t2 in one_level(t) {
                out.push(SourceExpr::If(c.clone(), Box::new(t2), f.clone()));
            }
            for f2 in one_level(f) {
                out.push(SourceExpr::If(c.clone(), t.clone(), Box::new(f2)));
            }
        }
        _ => {}
    }
}

fn one_level(e: &SourceExpr) -> Vec<SourceExpr> {
    let mut out = Vec::new();
    rewrite_everywhere(e, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{parse_source, ParseOptions};

    #[test]
    fn shrinks_to_the_failing_core() {
        // Predicate: the term contains a selection of NoSuchField.
        let e = parse_source(
            "rec a =? \\x. x, b =? {} in (a b).NoSuchField",
            ParseOptions::default(),
        )
        .unwrap();
        let small = shrink(&e, &mut |t| {
            crate::source::print_source(t).contains("NoSuchField")
        });
        assert!(small.node_count() < e.node_count());
        assert!(crate::source::print_source(&small).contains("NoSuchField"));
        assert!(free_vars(&small).is_empty());
    }

    #[test]
    fn fixpoint_when_nothing_passes() {
        let e = parse_source("\\x. x", ParseOptions::default()).unwrap();
        let same = shrink(&e, &mut |t| t == &e);
        assert_eq!(same, e);
    }
}
