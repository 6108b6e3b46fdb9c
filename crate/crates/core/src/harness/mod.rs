//! Random program generation, differential checking of the two
//! interpreters, and property drivers for the semantic lemmas.

mod commute;
mod determinism;
mod diff;
mod gen;
mod shrink;

pub use commute::{check_commutation, CommutationReport, SquareFailure};
pub use determinism::{enumerate_steps, check_determinism, DeterminismViolation};
pub use diff::{differential_check, Agreement, DiffConfig, Verdict};
pub use diff::check_size_hypothesis;
pub use gen::{gen_closed_value, gen_expr, gen_expr_flagged, gen_target_config, GenConfig};
pub use shrink::shrink;
