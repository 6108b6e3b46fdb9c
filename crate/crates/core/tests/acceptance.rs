//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::time::{Duration, Instant};

use backpatch_core::harness::{
    check_commutation, check_determinism, check_size_hypothesis, differential_check,
    gen_closed_value, gen_expr_flagged, gen_target_config, Agreement, DiffConfig, GenConfig,
};
use backpatch_core::names::Ident;
use backpatch_core::sizing::SizeModel;
use backpatch_core::source::{
    alpha_equal, classify_stuck, decompose, lookup_context, parse_source, print_source,
    run_source, run_source_traced, LiftFrame, ParseOptions, SizeIndication, SourceExpr,
    SourceFault, SourceOutcome, SourceRule, TopFrame,
};
use backpatch_core::target::{
    admin_normalize, applicable_redexes, canonical_config, classify_stuck_t, config_equal,
    parse_target_config, run_target, run_target_traced, step_deterministic, Configuration,
    RedexRule, TargetExpr, TargetFault, TargetOutcome, TargetStep,
};
use backpatch_core::translate::translate_program;

fn model() -> SizeModel {
    SizeModel::default()
}

fn parse(s: &str) -> SourceExpr {
    parse_source(s, ParseOptions { prims: true }).unwrap()
}

fn finish(criterion: u32, name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!(
        "ACCEPTANCE {criterion} ({name}): PASS in {:.2?} (budget {:.0?})",
        elapsed, budget
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:.2?} > {budget:.0?}"
    );
}

/// Criterion 1: the five source-calculus example figures reproduce their
/// intermediate terms and final outcomes step for step.
#[test]
fn criterion_1_source_figure_fidelity() {
    let t0 = Instant::now();
    let m = model();

    // Substitution and function application.
    let e = parse("rec x =? \\y.y in x x");
    let (outcome, trace) = run_source_traced(&e, 10, &m);
    let rules: Vec<SourceRule> = trace.iter().map(|(r, _)| *r).collect();
    assert_eq!(rules, vec![SourceRule::Subst, SourceRule::Beta, SourceRule::EM]);
    let shown = [
        "rec x =? \\y.y in (\\y.y) x",
        "rec x =? \\y.y in (rec y =? x in y)",
        "rec x =? \\y.y, y =? x in y",
    ];
    for (step, expected) in trace.iter().zip(shown) {
        assert!(
            alpha_equal(&step.1, &parse(expected)),
            "expected {expected}, got {}",
            print_source(&step.1)
        );
    }
    match outcome {
        SourceOutcome::Answer(a) => assert!(alpha_equal(&a, &parse(shown[2]))),
        other => panic!("expected answer, got {other:?}"),
    }

    // Forward references, first block: stuck immediately, the value of x
    // cannot be copied right to left.
    let e = parse("rec z =? x x, x =[2] \\y.y in z");
    let (outcome, trace) = run_source_traced(&e, 10, &m);
    assert!(trace.is_empty());
    match outcome {
        SourceOutcome::Faulty { kind, .. } => {
            assert_eq!(kind, SourceFault::UndefinedVariableDeref)
        }
        other => panic!("expected faulty, got {other:?}"),
    }

    // Forward references, second block: the copy goes left to right.
    let e = parse("rec x =[2] \\y.y, z =? x x in z");
    let (outcome, trace) = run_source_traced(&e, 20, &m);
    assert_eq!(trace[0].0, SourceRule::Subst);
    assert!(alpha_equal(
        &trace[0].1,
        &parse("rec x =[2] \\y.y, z =? (\\y.y) x in z")
    ));
    assert!(outcome.is_answer());

    // Size indications and dereferencing contexts, first block: already an
    // answer (the =? definition may hold a bare variable).
    let e = parse("rec w =? {}, y =? {X = w}, z =? y in z");
    let (outcome, trace) = run_source_traced(&e, 10, &m);
    assert!(trace.is_empty());
    match &outcome {
        SourceOutcome::Answer(a) => assert!(alpha_equal(a, &e)),
        other => panic!("expected answer, got {other:?}"),
    }

    // Second block: the =[2] slot dereferences and copies the record.
    let e = parse("rec w =? {}, y =? {X = w}, z =[2] y in z");
    let (outcome, trace) = run_source_traced(&e, 10, &m);
    let rules: Vec<SourceRule> = trace.iter().map(|(r, _)| *r).collect();
    assert_eq!(rules, vec![SourceRule::Subst]);
    match outcome {
        SourceOutcome::Answer(a) => assert!(alpha_equal(
            &a,
            &parse("rec w =? {}, y =? {X = w}, z =[2] {X = w} in z")
        )),
        other => panic!("expected answer, got {other:?}"),
    }

    // Mutual recursion: even/odd applied to 56.
    let e = parse(
        "rec even =? \\x. (x = 0) or (odd (x - 1)),\n\
         \x20    odd =[2] \\x. (x > 0) and (even (x - 1))\n\
         in even 56",
    );
    let (outcome, trace) = run_source_traced(&e, 10_000, &m);
    assert_eq!(trace[0].0, SourceRule::Subst);
    assert!(alpha_equal(
        &trace[0].1,
        &parse(
            "rec even =? \\x. (x = 0) or (odd (x - 1)),\n\
             \x20    odd =[2] \\x. (x > 0) and (even (x - 1))\n\
             in (\\x. (x = 0) or (odd (x - 1))) 56"
        )
    ));
    assert_eq!(trace[1].0, SourceRule::Beta);
    assert_eq!(trace[2].0, SourceRule::EM);
    assert!(alpha_equal(
        &trace[2].1,
        &parse(
            "rec even =? \\x. (x = 0) or (odd (x - 1)),\n\
             \x20    odd =[2] \\x. (x > 0) and (even (x - 1)),\n\
             \x20    x1 =? 56\n\
             in (x1 = 0) or (odd (x1 - 1))"
        )
    ));
    let odd55 = parse(
        "rec even =? \\x. (x = 0) or (odd (x - 1)),\n\
         \x20    odd =[2] \\x. (x > 0) and (even (x - 1)),\n\
         \x20    x1 =? 56\n\
         in odd 55",
    );
    assert!(trace.iter().any(|(_, t)| alpha_equal(t, &odd55)));
    match outcome {
        SourceOutcome::Answer(SourceExpr::Letrec(_, body)) => {
            assert_eq!(*body, SourceExpr::Bool(true))
        }
        other => panic!("expected a letrec answer, got {other:?}"),
    }

    // Recursive data structure: a cyclic list is an answer as it stands.
    let e = parse("rec h =? 0, x =[3] {Head = h, Tail = x} in x");
    let (outcome, trace) = run_source_traced(&e, 10, &m);
    assert!(trace.is_empty());
    match outcome {
        SourceOutcome::Answer(a) => assert!(alpha_equal(&a, &e)),
        other => panic!("expected answer, got {other:?}"),
    }

    finish(1, "source figure fidelity", t0, Duration::from_secs(1));
}

/// Criterion 2: the target-calculus example figures.
#[test]
fn criterion_2_target_figure_fidelity() {
    let t0 = Instant::now();
    let m = model();

    // Reduction example: ends at <heap | 0> through the figure's
    // intermediate configurations.
    let start =
        parse_target_config("(\\x. x.X.Y) (let y = {Y = 0} in {X = y})").unwrap();
    let (outcome, trace) = run_target_traced(&start, 100, &m);
    let fig_mid =
        parse_target_config("heap { #0 = {Y = 0}; #1 = {X = #0}; #2 = \\x. x.X.Y; } expr { #2 #1 }")
            .unwrap();
    let fig_selects =
        parse_target_config("heap { #0 = {Y = 0}; #1 = {X = #0}; #2 = \\x. x.X.Y; } expr { #1.X.Y }")
            .unwrap();
    assert!(trace.iter().any(|(_, c)| config_equal(c, &fig_mid)));
    assert!(trace.iter().any(|(_, c)| config_equal(c, &fig_selects)));
    match &outcome {
        TargetOutcome::Answer(a) => {
            assert_eq!(a.expr, TargetExpr::Nat(0));
            assert_eq!(a.heap.len(), 3);
        }
        other => panic!("expected answer, got {other:?}"),
    }

    // Mutually recursive functions: the translation of the even/odd
    // binding reaches the figure's final two-closure configuration.
    let src = parse(
        "rec even =? \\x. (x = 0) or (odd (x - 1)),\n\
         \x20    odd =[2] \\x. (x > 0) and (even (x - 1))\n\
         in even 56",
    );
    let start = translate_program(&src).unwrap();
    let (outcome, trace) = run_target_traced(&start, 10_000, &m);
    let two_closures = parse_target_config(
        "heap {\n\
           #0 = \\x. (x > 0) and (#1 (x - 1));\n\
           #1 = \\x. (x = 0) or (#0 (x - 1));\n\
         }\n\
         expr { #1 56 }",
    )
    .unwrap();
    assert!(
        trace
            .iter()
            .any(|(_, c)| config_equal(&canonical_config(c), &canonical_config(&two_closures))),
        "the two-closure configuration was not reached"
    );
    match outcome {
        TargetOutcome::Answer(a) => assert_eq!(a.expr, TargetExpr::Bool(true)),
        other => panic!("expected answer true, got {other:?}"),
    }

    finish(2, "target figure fidelity", t0, Duration::from_secs(1));
}

/// Criterion 3: determinism of the source relation, checked by exhaustive
/// decomposition enumeration on 1000 generated programs.
#[test]
fn criterion_3_source_determinism() {
    let t0 = Instant::now();
    let m = model();
    for seed in 0..1000u64 {
        let cfg = GenConfig {
            seed,
            prims_enabled: seed % 2 == 0,
            faulty_rate: 0.15,
            ..GenConfig::default()
        };
        let (e, _) = gen_expr_flagged(&cfg, &m);
        if let Err(v) = check_determinism(&e, 50, &m) {
            panic!("determinism violation at seed {seed}: {v:?}");
        }
    }
    finish(3, "source determinism", t0, Duration::from_secs(30));
}

/// Criterion 4: strong commutation of the target rules on 300 generated
/// reachable configurations with at most 6 heap bindings.
#[test]
fn criterion_4_strong_commutation() {
    let t0 = Instant::now();
    let m = model();
    let mut checked = 0usize;
    let mut seed = 0u64;
    let mut squares = 0usize;
    while checked < 300 {
        let cfg = GenConfig {
            seed,
            prims_enabled: seed % 2 == 0,
            faulty_rate: 0.1,
            ..GenConfig::default()
        };
        seed += 1;
        let c = gen_target_config(&cfg, &m);
        if c.heap.len() > 6 {
            continue;
        }
        checked += 1;
        let report = check_commutation(&c, 5_000, &m);
        squares += report.squares_checked;
        assert!(
            report.ok(),
            "commutation failure on configuration from seed {}: {:?}",
            seed - 1,
            report.failures
        );
    }
    println!("  ({squares} commutation squares closed)");
    finish(4, "strong commutation", t0, Duration::from_secs(60));
}

/// Criterion 5: the correctness theorem at desk scale. 1000 generated
/// closed programs with at least 15% deliberately faulty, fuel 5000 source
/// and 100000 target, zero disagreements, at least 60% conclusive.
#[test]
fn criterion_5_differential_correctness() {
    let t0 = Instant::now();
    let m = model();
    let diff = DiffConfig {
        fuel: 5_000,
        fuel_multiplier: 20,
        model: m,
        ..DiffConfig::default()
    };
    let mut planted = 0usize;
    let mut conclusive = 0usize;
    let mut disagreements = Vec::new();
    let n = 1000u64;
    for seed in 0..n {
        let cfg = GenConfig {
            seed,
            prims_enabled: seed % 2 == 0,
            faulty_rate: 0.2,
            ..GenConfig::default()
        };
        let (e, was_planted) = gen_expr_flagged(&cfg, &m);
        planted += usize::from(was_planted);
        let v = differential_check(&e, &diff);
        match v.agreement {
            Agreement::AgreeAnswer | Agreement::AgreeFaulty => conclusive += 1,
            Agreement::Inconclusive(_) => {}
            Agreement::Disagree(detail) => {
                disagreements.push((seed, detail, print_source(&e)))
            }
        }
    }
    for (seed, detail, program) in &disagreements {
        eprintln!("DISAGREE seed {seed}: {detail}\n  {program}");
    }
    assert!(disagreements.is_empty(), "{} disagreements", disagreements.len());
    assert!(
        planted * 100 >= 15 * n as usize,
        "only {planted} of {n} programs had faults planted"
    );
    assert!(
        conclusive * 100 >= 60 * n as usize,
        "only {conclusive} of {n} verdicts were conclusive"
    );
    println!("  ({conclusive} conclusive, {planted} deliberately faulty)");
    finish(5, "differential correctness", t0, Duration::from_secs(300));
}

/// Criterion 6: size coherence on 500 generated non-variable values.
#[test]
fn criterion_6_size_coherence() {
    let t0 = Instant::now();
    let m = model();
    for seed in 0..500u64 {
        let v = gen_closed_value(seed, &m, false);
        assert!(
            check_size_hypothesis(&v, &m),
            "size hypothesis failed for {}",
            print_source(&v)
        );
    }
    finish(6, "size coherence", t0, Duration::from_secs(10));
}

/// Criterion 7: administrative normalization terminates, is idempotent,
/// and leaves no administrative redex, on 1000 generated configurations.
#[test]
fn criterion_7_administrative_normalization() {
    let t0 = Instant::now();
    let m = model();
    for seed in 0..1000u64 {
        let cfg = GenConfig {
            seed,
            prims_enabled: seed % 2 == 0,
            faulty_rate: 0.1,
            ..GenConfig::default()
        };
        let c = gen_target_config(&cfg, &m);
        let n1 = admin_normalize(&c, &m, 100_000)
            .unwrap_or_else(|e| panic!("budget exceeded at seed {seed}: {e:?}"));
        let n2 = admin_normalize(&n1, &m, 100_000).unwrap();
        assert_eq!(n1, n2, "not idempotent at seed {seed}");
        assert!(
            applicable_redexes(&n1, &m)
                .iter()
                .all(|r| !r.rule.is_administrative()),
            "administrative redex left at seed {seed}"
        );
    }
    finish(7, "administrative normalization", t0, Duration::from_secs(30));
}

/// Criterion 8: every generated stuck term and configuration receives
/// exactly one fault kind from its proposition's case list.
#[test]
fn criterion_8_fault_classification() {
    let t0 = Instant::now();
    let m = model();

    let mut source_stuck = 0usize;
    let mut target_stuck = 0usize;
    for seed in 0..600u64 {
        let prims = seed % 2 == 0;
        let cfg = GenConfig {
            seed,
            prims_enabled: prims,
            faulty_rate: 0.5,
            ..GenConfig::default()
        };
        let (e, _) = gen_expr_flagged(&cfg, &m);

        if let SourceOutcome::Faulty { kind, witness } = run_source(&e, 2_000, &m) {
            source_stuck += 1;
            assert_eq!(classify_stuck(&witness, &m), Ok(kind));
            let bullets = source_fault_bullets(&witness, &m);
            assert_eq!(
                bullets.len(),
                1,
                "bullets {bullets:?} for {}",
                print_source(&witness)
            );
            assert_eq!(bullets[0], kind);
            if !prims {
                assert!(matches!(
                    kind,
                    SourceFault::UndefinedVariableDeref
                        | SourceFault::SizeMismatch
                        | SourceFault::RecordApplied
                        | SourceFault::MissingField
                        | SourceFault::FunctionSelected
                ));
            }
        }

        let start = translate_program(&e).unwrap();
        if let TargetOutcome::Faulty { kind, witness } = run_target(&start, 20_000, &m) {
            target_stuck += 1;
            assert_eq!(classify_stuck_t(&witness, &m), Ok(kind));
            assert!(matches!(step_deterministic(&witness, &m), TargetStep::Stuck));
        }
    }
    assert!(source_stuck >= 100, "only {source_stuck} stuck source terms");
    assert!(target_stuck >= 100, "only {target_stuck} stuck configurations");

    // Curated configurations exercising each target fault kind exactly.
    let matrix: &[(&str, TargetFault)] = &[
        ("q 1", TargetFault::UnboundCall),
        (
            "heap { #0 = alloc 2; } expr { #0 1 }",
            TargetFault::NonFunctionCall,
        ),
        ("3 4", TargetFault::NumberCalled),
        ("q.X", TargetFault::UnboundSelect),
        (
            "heap { #0 = {A = 1}; } expr { #0.X }",
            TargetFault::BadRecordSelect,
        ),
        ("3.X", TargetFault::NumberSelected),
        (
            "heap { #0 = {}; } expr { alloc #0 }",
            TargetFault::BareAlloc,
        ),
        ("update q q", TargetFault::UpdateUnbound),
        (
            "heap { #0 = alloc 2; #1 = {A = 1, B = 2}; } expr { update #0 #1 }",
            TargetFault::UpdateSizeMismatch,
        ),
        (
            "heap { #0 = alloc 2; #1 = alloc 2; } expr { update #0 #1 }",
            TargetFault::UpdateFromDummy,
        ),
        ("update 3", TargetFault::BareUpdate),
        ("1 + {}", TargetFault::PrimArgMismatch),
    ];
    for (text, expected) in matrix {
        let c = parse_target_config(text).unwrap();
        match run_target(&c, 50, &m) {
            TargetOutcome::Faulty { kind, .. } => {
                assert_eq!(kind, *expected, "for {text}")
            }
            other => panic!("{text} should be faulty, got {other:?}"),
        }
    }

    println!("  ({source_stuck} stuck terms, {target_stuck} stuck configurations)");
    finish(8, "fault classification", t0, Duration::from_secs(30));
}

/// Checks the faulty-characterization bullets one by one on the maximal
/// decomposition of a stuck term; an independent route to the classifier.
fn source_fault_bullets(e: &SourceExpr, m: &SizeModel) -> Vec<SourceFault> {
    let Ok(d) = decompose(e, m) else {
        return Vec::new();
    };
    let mut hits = Vec::new();
    let innermost = d.context.frames.last();

    // Bullet 1: a variable in dereferencing position with no value.
    if let SourceExpr::Var(x) = &d.focus {
        let dereferencing = match innermost {
            Some(LiftFrame::AppRight { .. }) => false,
            Some(_) => true,
            None => matches!(
                d.context.top,
                TopFrame::InBinding {
                    size: SizeIndication::Known(_),
                    ..
                }
            ),
        };
        if dereferencing && lookup_context(&d.context, x).is_none() {
            hits.push(SourceFault::UndefinedVariableDeref);
        }
    }

    // Bullet 2: known-size slot holding a non-variable value of the wrong
    // or undefined size.
    if innermost.is_none() {
        if let TopFrame::InBinding {
            size: SizeIndication::Known(n),
            ..
        } = &d.context.top
        {
            if d.focus.is_value() && !matches!(d.focus, SourceExpr::Var(_))
                && m.size_source_value(&d.focus) != Some(*n)
            {
                hits.push(SourceFault::SizeMismatch);
            }
        }
    }

    match (&d.focus, innermost) {
        // Bullet 3: a record in function position.
        (SourceExpr::Record(_), Some(LiftFrame::AppLeft { .. })) => {
            hits.push(SourceFault::RecordApplied)
        }
        // Bullet 4: a record selected at a missing field.
        (SourceExpr::Record(row), Some(LiftFrame::Select { field })) => {
            if !row.iter().any(|(f, _)| f == field) {
                hits.push(SourceFault::MissingField);
            }
        }
        // Bullet 5: a function under selection.
        (SourceExpr::Lam(..), Some(LiftFrame::Select { .. })) => {
            hits.push(SourceFault::FunctionSelected)
        }
        // Extension bullets.
        (SourceExpr::Nat(_) | SourceExpr::Bool(_), Some(LiftFrame::AppLeft { .. })) => {
            hits.push(SourceFault::LiteralApplied)
        }
        (SourceExpr::Nat(_) | SourceExpr::Bool(_), Some(LiftFrame::Select { .. })) => {
            hits.push(SourceFault::LiteralSelected)
        }
        (focus, Some(LiftFrame::PrimLeft { op, right })) if focus.is_value() => {
            if !matches!(focus, SourceExpr::Var(_)) && delta_undefined(*op, focus, right) {
                hits.push(SourceFault::PrimArgMismatch);
            }
        }
        (focus, Some(LiftFrame::ShortCircuitLeft { .. })) if focus.is_value() => {
            if !matches!(focus, SourceExpr::Var(_) | SourceExpr::Bool(_)) {
                hits.push(SourceFault::PrimArgMismatch);
            }
        }
        (focus, Some(LiftFrame::IfCond { .. })) if focus.is_value() => {
            if !matches!(focus, SourceExpr::Var(_) | SourceExpr::Bool(_)) {
                hits.push(SourceFault::PrimArgMismatch);
            }
        }
        _ => {}
    }
    hits
}

fn delta_undefined(
    op: backpatch_core::names::PrimOp,
    l: &SourceExpr,
    r: &SourceExpr,
) -> bool {
    let _ = op;
    !(matches!(l, SourceExpr::Nat(_)) && matches!(r, SourceExpr::Nat(_)))
}

/// The pipeline-coherence invariant behind the CLI: running the source,
/// compiling, executing, and comparing is the same as the one-shot
/// differential check, on every corpus-sized program here.
#[test]
fn pipeline_coherence_on_figures() {
    let m = model();
    for text in [
        "rec x =? \\y.y in x x",
        "rec z =? x x, x =[2] \\y.y in z",
        "rec w =? {}, y =? {X = w}, z =[2] y in z",
        "rec h =? 0, x =[3] {Head = h, Tail = x} in x",
    ] {
        let e = parse(text);
        let verdict = differential_check(&e, &DiffConfig::default());
        let src = run_source(&e, 5_000, &m);
        let tgt = run_target(&translate_program(&e).unwrap(), 100_000, &m);
        assert_eq!(src.is_answer(), verdict.source_outcome.is_answer());
        assert_eq!(tgt.is_answer(), verdict.target_outcome.is_answer());
        match (&src, &tgt) {
            (SourceOutcome::Answer(_), TargetOutcome::Answer(_)) => {
                assert!(matches!(verdict.agreement, Agreement::AgreeAnswer))
            }
            (SourceOutcome::Faulty { .. }, TargetOutcome::Faulty { .. }) => {
                assert!(matches!(verdict.agreement, Agreement::AgreeFaulty))
            }
            other => panic!("unexpected outcome pair {other:?}"),
        }
    }
}
