//! One-step commutation checking for the target relation.
//!
//! For every pair of distinct applicable redexes, applying them in either
//! order must close in one further step each, up to structural equivalence.
//! Positions are re-resolved structurally after the first step (the rule
//! name is kept and every same-rule candidate is tried) rather than through
//! a formal residual theory; squares that do not close are reported with
//! both derivations, never guessed around.

use alloc::string::String;
use alloc::vec::Vec;

use crate::sizing::SizeModel;
use crate::target::{
    applicable_redexes, apply_rule, config_equal, print_config, Configuration, Redex,
};

#[derive(Debug, Clone)]
pub struct SquareFailure {
    pub first: Redex,
    pub second: Redex,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct CommutationReport {
    pub redexes: usize,
    pub squares_checked: usize,
    pub failures: Vec<SquareFailure>,
}

impl CommutationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every unordered pair of distinct applicable redexes of `c`, up
/// to `pairs_budget` pairs. A configuration with zero or one redex passes
/// vacuously.
pub fn check_commutation(
    c: &Configuration,
    pairs_budget: usize,
    model: &SizeModel,
) -> CommutationReport {
    let redexes = applicable_redexes(c, model);
    let mut report = CommutationReport {
        redexes: redexes.len(),
        ..CommutationReport::default()
    };
    'pairs: for i in 0..redexes.len() {
        for j in (i + 1)..redexes.len() {
            if report.squares_checked >= pairs_budget {
                break 'pairs;
            }
            report.squares_checked += 1;
            if let Err(detail) = close_square(c, &redexes[i], &redexes[j], model) {
                report.failures.push(SquareFailure {
                    first: redexes[i].clone(),
                    second: redexes[j].clone(),
                    detail,
                });
            }
        }
    }
    report
}

/// `c --r1--> c1` and `c --r2--> c2` must extend to `c1 --r2'--> d` and
/// `c2 --r1'--> d` for redexes of the same rules.
fn close_square(
    c: &Configuration,
    r1: &Redex,
    r2: &Redex,
    model: &SizeModel,
) -> Result<(), String> {
    let c1 = apply_rule(c, r1, model)
        .map_err(|e| alloc::format!("first redex no longer applies: {e}"))?;
    let c2 = apply_rule(c, r2, model)
        .map_err(|e| alloc::format!("second redex no longer applies: {e}"))?;
    let from_c1: Vec<Configuration> = applicable_redexes(&c1, model)
        .iter()
        .filter(|r| r.rule == r2.rule)
        .filter_map(|r| apply_rule(&c1, r, model).ok())
        .collect();
    let from_c2: Vec<Configuration> = applicable_redexes(&c2, model)
        .iter()
        .filter(|r| r.rule == r1.rule)
        .filter_map(|r| apply_rule(&c2, r, model).ok())
        .collect();
    for a in &from_c1 {
        for b in &from_c2 {
            if config_equal(a, b) {
                return Ok(());
            }
        }
    }
    Err(alloc::format!(
        "no common configuration: after {}/{} the candidates are {:?} and {:?} from {}",
        r1.rule,
        r2.rule,
        from_c1.iter().map(print_config).collect::<Vec<_>>(),
        from_c2.iter().map(print_config).collect::<Vec<_>>(),
        print_config(c),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::parse_target_config;

    fn cfg(s: &str) -> Configuration {
        parse_target_config(s).unwrap()
    }

    #[test]
    fn gc_and_allocate_commute() {
        // A dead binding and an allocatable lambda at the focus.
        let c = cfg("heap { #0 = alloc 4; } expr { (\\x. x) 5 }");
        let report = check_commutation(&c, 100, &SizeModel::default());
        assert!(report.redexes >= 2);
        assert!(report.ok(), "{:?}", report.failures);
    }

    #[test]
    fn single_redex_passes_vacuously() {
        let c = cfg("heap { #0 = \\y. y; } expr { #0 5 }");
        let report = check_commutation(&c, 100, &SizeModel::default());
        assert_eq!(report.redexes, 1);
        assert_eq!(report.squares_checked, 0);
        assert!(report.ok());
    }

    #[test]
    fn two_allocations_commute() {
        let c = cfg("(\\x. x) {A = 1}");
        let report = check_commutation(&c, 100, &SizeModel::default());
        assert!(report.redexes >= 2);
        assert!(report.ok(), "{:?}", report.failures);
    }

    #[test]
    fn update_commutes_with_unrelated_gc() {
        let c = cfg(
            "heap { #0 = alloc 2; #1 = \\x. x; #2 = {A = 1, B = 2}; }\n\
             expr { let _ = update #0 #1 in #0 }",
        );
        let report = check_commutation(&c, 100, &SizeModel::default());
        assert!(report.ok(), "{:?}", report.failures);
    }
}
