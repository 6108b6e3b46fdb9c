//! Pretty-printer for source terms, inverse of the parser up to alpha and
//! whitespace.

use alloc::string::String;
use core::fmt::Write;

use crate::names::PrimOp;

use super::ast::{SizeIndication, SourceExpr};

/// Precedence levels, loosest first. Mirrors the grammar in the parser.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Expr,
    Or,
    And,
    Cmp,
    Add,
    App,
    Atom,
}

pub fn print_source(e: &SourceExpr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, Prec::Expr);
    s
}

fn op_prec(op: PrimOp) -> (Prec, Prec, Prec) {
    // (node, left operand, right operand)
    match op {
        PrimOp::Or => (Prec::Or, Prec::Or, Prec::And),
        PrimOp::And => (Prec::And, Prec::And, Prec::Cmp),
        PrimOp::Eq | PrimOp::Gt => (Prec::Cmp, Prec::Add, Prec::Add),
        PrimOp::Add | PrimOp::Sub => (Prec::Add, Prec::Add, Prec::App),
    }
}

fn write_expr(out: &mut String, e: &SourceExpr, min: Prec) {
    match e {
        SourceExpr::Var(x) => {
            let _ = write!(out, "{x}");
        }
        SourceExpr::Nat(n) => {
            let _ = write!(out, "{n}");
        }
        SourceExpr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        SourceExpr::Record(row) => {
            out.push('{');
            for (i, (f, x)) in row.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{f} = {x}");
            }
            out.push('}');
        }
        SourceExpr::Select(s, f) => {
            paren(out, min > Prec::App, |out| {
                write_expr(out, s, Prec::Atom);
                let _ = write!(out, ".{f}");
            });
        }
        SourceExpr::App(f, a) => {
            paren(out, min > Prec::App, |out| {
                write_expr(out, f, Prec::App);
                out.push(' ');
                write_expr(out, a, Prec::Atom);
            });
        }
        SourceExpr::Prim(op, l, r) => {
            let (node, lp, rp) = op_prec(*op);
            paren(out, min > node, |out| {
                write_expr(out, l, lp);
                let _ = write!(out, " {op} ");
                write_expr(out, r, rp);
            });
        }
        SourceExpr::Lam(x, body) => {
            paren(out, min > Prec::Expr, |out| {
                let _ = write!(out, "\\{x}. ");
                write_expr(out, body, Prec::Expr);
            });
        }
        SourceExpr::If(c, t, f) => {
            paren(out, min > Prec::Expr, |out| {
                out.push_str("if ");
                write_expr(out, c, Prec::Expr);
                out.push_str(" then ");
                write_expr(out, t, Prec::Expr);
                out.push_str(" else ");
                write_expr(out, f, Prec::Expr);
            });
        }
        SourceExpr::Letrec(b, body) => {
            paren(out, min > Prec::Expr, |out| {
                out.push_str("rec ");
                for (i, d) in b.0.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    match d.size {
                        SizeIndication::Unknown => {
                            let _ = write!(out, "{} =? ", d.var);
                        }
                        SizeIndication::Known(n) => {
                            let _ = write!(out, "{} =[{n}] ", d.var);
                        }
                    }
                    write_expr(out, &d.rhs, Prec::Expr);
                }
                out.push_str(" in ");
                write_expr(out, body, Prec::Expr);
            });
        }
    }
}

/// A select or application subterm that is itself a lambda/rec/if needs
/// parentheses even though those forms are "loosest": the grammar only
/// admits them at expression level.
fn paren(out: &mut String, needed: bool, f: impl FnOnce(&mut String)) {
    if needed {
        out.push('(');
        f(out);
        out.push(')');
    } else {
        f(out);
    }
}
