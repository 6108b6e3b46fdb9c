//! A workbench for compiling extended call-by-value recursion by immediate
//! in-place update.
//!
//! The crate has three layers:
//!
//! * [`source`] — the source calculus: a call-by-value lambda calculus with
//!   records and a `rec` binding whose definitions carry size indications.
//!   Evaluation is small-step, with a top-level binding acting as a
//!   recursive environment and destruct-time substitution.
//! * [`target`] — the target calculus: a lambda calculus with an explicit
//!   heap, non-recursive `let`, dummy-block allocation and in-place update.
//! * [`translate`] — the compilation scheme mapping the former onto the
//!   latter by pre-allocating known-size definitions and patching them in
//!   place once their values are computed.
//!
//! [`sizing`] fixes the concrete size model shared by both calculi, and
//! [`harness`] provides random program generation plus the differential
//! checker that runs both interpreters and compares outcomes.
//!
//! The crate is `no_std` (with `alloc`); everything here is pure term
//! manipulation. File formats, tracing output and the CLI live in the
//! companion `backpatch-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod harness;
mod lex;
pub mod names;
pub mod sizing;
pub mod source;
pub mod target;
pub mod translate;

pub use names::{FieldName, Ident, Location, PrimOp};
pub use sizing::SizeModel;
