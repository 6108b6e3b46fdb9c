//! The differential oracle: run a program in the source calculus and its
//! translation in the target calculus, then compare outcomes.
//!
//! Answers are compared as follows: the source answer is itself translated
//! and administratively normalized (allocated, updated, let-bound, and
//! garbage collected, but never beta-reduced), and the result must be
//! structurally equal to the directly computed target answer on the part
//! reachable from the result value. The reachable restriction matters
//! because the single-binding GC rule cannot remove cyclic garbage, so the
//! two paths may differ in dead heap cycles.
//!
//! Disagreement is only ever declared on refutable evidence: one side
//! answering while the other is faulty, or both answering with different
//! canonical configurations. Running out of fuel on either side is
//! inconclusive; divergence preservation is not testable.

use alloc::format;
use alloc::string::String;

use crate::sizing::SizeModel;
use crate::source::{run_source, SourceExpr, SourceOutcome};
use crate::target::{
    admin_normalize, canonicalize, config_equal, run_target, Configuration, TargetExpr,
    TargetOutcome, VarRef,
};
use crate::translate::{transl, translate_program};

#[derive(Debug, Clone)]
pub struct DiffConfig {
    /// Source-side step budget.
    pub fuel: u64,
    /// The target runs for `fuel * fuel_multiplier` steps: every source
    /// step costs at least one target step, with no useful upper bound.
    pub fuel_multiplier: u64,
    /// Step budget for administrative normalization of translated answers.
    pub admin_budget: u64,
    /// Target budget used when the source side already ran out of fuel.
    /// The verdict is inconclusive either way (a cross-classification
    /// needs a conclusive source run), so there is no point letting a
    /// diverging translation grow for the full multiplied budget.
    pub target_fuel_when_source_looped: u64,
    pub model: SizeModel,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig {
            fuel: 5_000,
            fuel_multiplier: 20,
            admin_budget: 200_000,
            target_fuel_when_source_looped: 2_000,
            model: SizeModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Agreement {
    /// Both sides answered and the canonical configurations match.
    AgreeAnswer,
    /// Both sides got stuck on a non-answer.
    AgreeFaulty,
    /// At least one side ran out of fuel (or a budget); nothing refutable.
    Inconclusive(String),
    /// Refutable mismatch: answer against fault, or different answers.
    Disagree(String),
}

impl Agreement {
    pub fn is_disagree(&self) -> bool {
        matches!(self, Agreement::Disagree(_))
    }

    pub fn is_conclusive(&self) -> bool {
        matches!(self, Agreement::AgreeAnswer | Agreement::AgreeFaulty)
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub source_outcome: SourceOutcome,
    pub target_outcome: TargetOutcome,
    pub agreement: Agreement,
}

/// Runs both interpreters on a closed, well-formed program and compares.
pub fn differential_check(e: &SourceExpr, cfg: &DiffConfig) -> Verdict {
    let source_outcome = run_source(e, cfg.fuel, &cfg.model);
    let start = translate_program(e).expect("differential_check needs closed well-formed input");
    let target_fuel = if matches!(source_outcome, SourceOutcome::FuelExhausted { .. }) {
        cfg.target_fuel_when_source_looped
            .min(cfg.fuel.saturating_mul(cfg.fuel_multiplier))
    } else {
        cfg.fuel.saturating_mul(cfg.fuel_multiplier)
    };
    let target_outcome = run_target(&start, target_fuel, &cfg.model);
    let agreement = judge(&source_outcome, &target_outcome, cfg);
    Verdict {
        source_outcome,
        target_outcome,
        agreement,
    }
}

fn judge(src: &SourceOutcome, tgt: &TargetOutcome, cfg: &DiffConfig) -> Agreement {
    match (src, tgt) {
        (SourceOutcome::Answer(a), TargetOutcome::Answer(t)) => compare_answers(a, t, cfg),
        (SourceOutcome::Faulty { .. }, TargetOutcome::Faulty { .. }) => Agreement::AgreeFaulty,
        (SourceOutcome::Answer(_), TargetOutcome::Faulty { kind, .. }) => Agreement::Disagree(
            format!("source reached an answer but the target is faulty ({kind})"),
        ),
        (SourceOutcome::Faulty { kind, .. }, TargetOutcome::Answer(_)) => Agreement::Disagree(
            format!("source is faulty ({kind}) but the target reached an answer"),
        ),
        (SourceOutcome::FuelExhausted { .. }, _) => {
            Agreement::Inconclusive("source ran out of fuel".into())
        }
        (_, TargetOutcome::FuelExhausted { .. }) => {
            Agreement::Inconclusive("target ran out of fuel".into())
        }
    }
}

fn compare_answers(answer: &SourceExpr, target: &Configuration, cfg: &DiffConfig) -> Agreement {
    let translated = Configuration::initial(transl(answer));
    let normalized = match admin_normalize(&translated, &cfg.model, cfg.admin_budget) {
        Ok(c) => c,
        Err(_) => {
            return Agreement::Inconclusive(
                "administrative normalization of the translated answer exceeded its budget"
                    .into(),
            )
        }
    };
    let (Ok(expected), Ok(actual)) = (canonicalize(&normalized), canonicalize(target)) else {
        return Agreement::Disagree(
            "a configuration claimed as an answer does not canonicalize".into(),
        );
    };
    if config_equal(&expected, &actual) {
        Agreement::AgreeAnswer
    } else {
        Agreement::Disagree(format!(
            "answers differ: expected {} but the target computed {}",
            crate::target::print_config(&expected),
            crate::target::print_config(&actual),
        ))
    }
}

/// Checks size coherence on one closed non-variable value: allocating its
/// translation must produce a root block whose stored size equals the
/// source-side size. Values without a block of their own (literals of the
/// extension) make no claim and pass vacuously.
pub fn check_size_hypothesis(v: &SourceExpr, model: &SizeModel) -> bool {
    debug_assert!(v.is_value() && !matches!(v, SourceExpr::Var(_)));
    let Some(expected) = model.size_source_value(v) else {
        return true;
    };
    let cfg = Configuration::initial(transl(v));
    let Ok(normalized) = admin_normalize(&cfg, model, 10_000) else {
        return false;
    };
    let TargetExpr::Var(VarRef::Loc(l)) = normalized.expr else {
        return false;
    };
    match normalized.heap.get(l) {
        Some(hv) => model.size_stored_value(hv) == expected,
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{parse_source, ParseOptions};

    fn parse(s: &str) -> SourceExpr {
        parse_source(s, ParseOptions { prims: true }).unwrap()
    }

    #[test]
    fn figure_program_agrees_on_answer() {
        let v = differential_check(&parse("rec x =? \\y.y in x x"), &DiffConfig::default());
        assert_eq!(v.agreement, Agreement::AgreeAnswer);
    }

    #[test]
    fn right_to_left_copy_agrees_on_fault() {
        let v = differential_check(
            &parse("rec z =? x x, x =[2] \\y.y in z"),
            &DiffConfig::default(),
        );
        assert_eq!(v.agreement, Agreement::AgreeFaulty);
    }

    #[test]
    fn even_odd_agrees_with_value_true() {
        let e = parse(
            "rec even =? \\x. (x = 0) or (odd (x - 1)),\n\
             \x20    odd =[2] \\x. (x > 0) and (even (x - 1))\n\
             in even 56",
        );
        let cfg = DiffConfig {
            fuel: 10_000,
            ..DiffConfig::default()
        };
        let v = differential_check(&e, &cfg);
        assert_eq!(v.agreement, Agreement::AgreeAnswer);
        match &v.target_outcome {
            TargetOutcome::Answer(c) => assert_eq!(c.expr, TargetExpr::Bool(true)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn looping_programs_are_inconclusive() {
        let e = parse("rec f =[2] \\x. f x in f f");
        let cfg = DiffConfig {
            fuel: 100,
            ..DiffConfig::default()
        };
        let v = differential_check(&e, &cfg);
        assert!(matches!(v.agreement, Agreement::Inconclusive(_)));
    }

    #[test]
    fn wrong_size_agrees_on_fault() {
        // Annotation says 3, the lambda has size 2; both sides get stuck.
        let v = differential_check(
            &parse("rec x =[3] \\y.y in x x"),
            &DiffConfig::default(),
        );
        assert_eq!(v.agreement, Agreement::AgreeFaulty);
    }

    #[test]
    fn cyclic_answer_agrees() {
        let v = differential_check(
            &parse("rec h =? 0, x =[3] {Head = h, Tail = x} in x"),
            &DiffConfig::default(),
        );
        assert_eq!(v.agreement, Agreement::AgreeAnswer);
    }

    #[test]
    fn size_hypothesis_holds_for_basic_values() {
        let m = SizeModel::default();
        assert!(check_size_hypothesis(&parse("\\x.x"), &m));
        assert!(check_size_hypothesis(&parse("{}"), &m));
        assert!(check_size_hypothesis(
            &parse("\\x. {A = x, B = x}"),
            &m
        ));
    }
}
