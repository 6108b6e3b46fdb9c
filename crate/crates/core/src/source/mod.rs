//! The source calculus: call-by-value lambda calculus with records and an
//! extended `rec` binding.
//!
//! Bindings may define mutually recursive values whose right-hand sides are
//! arbitrary expressions; each definition carries a size indication, either
//! unknown (`=?`) or a known number of heap words (`=[n]`). Forward
//! references inside a binding are only legal towards known-size
//! definitions.

mod ast;
mod eval;
mod parser;
mod printer;
mod subst;
mod wellformed;

pub use ast::{
    Definition, Diagnostic, DiagnosticCode, Diagnostics, NodePath, SizeIndication, SourceBinding,
    SourceExpr,
};
pub use eval::{
    classify_stuck, decompose, lookup_context, reduce_step, run_source, run_source_traced,
    subreduce, Decomposition, LiftFrame, NoRedex, SourceEvalContext, SourceFault, SourceOutcome,
    SourceRule, SourceTrace, StepOutcome, SubRule, TopFrame,
};
pub use parser::{parse_source, ParseOptions};
pub use printer::print_source;
pub use subst::{alpha_equal, free_vars, substitute, Substitution};
pub use wellformed::check_wellformed;
