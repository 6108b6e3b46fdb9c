//! Random generation of closed, well-formed source programs and of target
//! configurations reachable from them.
//!
//! The generator tracks the shape of every variable in scope (function,
//! record with known fields, or opaque), which keeps a useful fraction of
//! the programs terminating and lets faults be planted deliberately rather
//! than only stumbled into. Forward references inside a binding are only
//! generated towards definitions that are syntactically abstractions or
//! records; those definitions then receive their manifest size annotation
//! through the regular inference pass, so condition 3 holds by
//! construction.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::names::{FieldName, Ident, PrimOp};
use crate::sizing::{infer_sizes_in_expr, SizeModel};
use crate::source::{check_wellformed, Definition, SizeIndication, SourceBinding, SourceExpr};
use crate::target::Configuration;
use crate::translate::translate_program;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: u32,
    pub max_binding_len: usize,
    /// Chance that a definition with a manifest size is annotated even when
    /// nothing forward-references it.
    pub known_size_probability: f64,
    pub prims_enabled: bool,
    /// Chance that a generated program gets a fault planted into it
    /// (a wrong size annotation, a bogus field selection, an application
    /// of a record, or a selection from a function).
    pub faulty_rate: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 4,
            max_binding_len: 3,
            known_size_probability: 0.3,
            prims_enabled: false,
            faulty_rate: 0.0,
        }
    }
}

/// What the generator knows about a variable in scope.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Shape {
    Fun,
    Rec(Vec<FieldName>),
    Opaque,
}

struct Gen<'m> {
    rng: ChaCha8Rng,
    model: &'m SizeModel,
    cfg: GenConfig,
    counter: u32,
}

const FIELD_POOL: [&str; 5] = ["A", "B", "C", "X", "Y"];

impl<'m> Gen<'m> {
    fn chance(&mut self, p: f64) -> bool {
        (self.rng.next_u32() as f64) < p * (u32::MAX as f64)
    }

    fn pick(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.rng.next_u32() as usize) % n
    }

    fn fresh(&mut self, prefix: &str) -> Ident {
        self.counter += 1;
        Ident(alloc::format!("{prefix}{}", self.counter))
    }

    fn field(&mut self) -> FieldName {
        FieldName::from(FIELD_POOL[self.pick(FIELD_POOL.len())])
    }

    /// A value at the bottom of the recursion.
    fn leaf(&mut self, env: &[(Ident, Shape)]) -> SourceExpr {
        let has_env = !env.is_empty();
        let mut options = 3;
        if self.cfg.prims_enabled {
            options += 2;
        }
        if has_env {
            options += 2;
        }
        match self.pick(options) {
            0 => self.lam(env, 0),
            1 => SourceExpr::Record(Vec::new()),
            2 => self.record(env),
            3 if self.cfg.prims_enabled => SourceExpr::Nat(self.rng.next_u32() as u64 % 10),
            4 if self.cfg.prims_enabled => SourceExpr::Bool(self.pick(2) == 0),
            _ => {
                let (x, _) = &env[self.pick(env.len())];
                SourceExpr::Var(x.clone())
            }
        }
    }

    fn lam(&mut self, env: &[(Ident, Shape)], depth: u32) -> SourceExpr {
        let x = self.fresh("p");
        let mut inner = env.to_vec();
        inner.push((x.clone(), Shape::Opaque));
        let body = self.expr(&inner, depth.saturating_sub(1));
        SourceExpr::Lam(x, alloc::boxed::Box::new(body))
    }

    fn record(&mut self, env: &[(Ident, Shape)]) -> SourceExpr {
        if env.is_empty() {
            return SourceExpr::Record(Vec::new());
        }
        let n = self.pick(3);
        let mut row = Vec::new();
        let mut used: Vec<FieldName> = Vec::new();
        for _ in 0..n {
            let f = self.field();
            if used.contains(&f) {
                continue;
            }
            used.push(f.clone());
            let (x, _) = &env[self.pick(env.len())];
            row.push((f, x.clone()));
        }
        SourceExpr::Record(row)
    }

    fn expr(&mut self, env: &[(Ident, Shape)], depth: u32) -> SourceExpr {
        if depth == 0 {
            return self.leaf(env);
        }
        match self.pick(10) {
            0 | 1 => self.leaf(env),
            2 => self.lam(env, depth),
            3 | 4 => self.app(env, depth),
            5 => self.select(env, depth),
            6 | 7 => self.letrec(env, depth),
            _ if self.cfg.prims_enabled => self.prim(env, depth),
            8 => self.app(env, depth),
            _ => self.letrec(env, depth),
        }
    }

    fn app(&mut self, env: &[(Ident, Shape)], depth: u32) -> SourceExpr {
        // Prefer a known function in scope; otherwise a fresh lambda.
        let funs: Vec<Ident> = env
            .iter()
            .filter(|(_, s)| *s == Shape::Fun)
            .map(|(x, _)| x.clone())
            .collect();
        let f = if !funs.is_empty() && self.chance(0.6) {
            SourceExpr::Var(funs[self.pick(funs.len())].clone())
        } else {
            self.lam(env, depth)
        };
        let a = self.expr(env, depth - 1);
        SourceExpr::app(f, a)
    }

    fn select(&mut self, env: &[(Ident, Shape)], depth: u32) -> SourceExpr {
        // Prefer selecting a field that exists.
        let recs: Vec<(Ident, Vec<FieldName>)> = env
            .iter()
            .filter_map(|(x, s)| match s {
                Shape::Rec(fs) if !fs.is_empty() => Some((x.clone(), fs.clone())),
                _ => None,
            })
            .collect();
        if !recs.is_empty() && self.chance(0.7) {
            let (x, fs) = &recs[self.pick(recs.len())];
            let f = fs[self.pick(fs.len())].clone();
            SourceExpr::Select(alloc::boxed::Box::new(SourceExpr::Var(x.clone())), f)
        } else {
            let s = self.expr(env, depth - 1);
            let f = self.field();
            SourceExpr::Select(alloc::boxed::Box::new(s), f)
        }
    }

    fn prim(&mut self, env: &[(Ident, Shape)], depth: u32) -> SourceExpr {
        if self.chance(0.3) {
            let c = self.expr(env, depth - 1);
            let t = self.expr(env, depth - 1);
            let f = self.expr(env, depth - 1);
            return SourceExpr::If(
                alloc::boxed::Box::new(c),
                alloc::boxed::Box::new(t),
                alloc::boxed::Box::new(f),
            );
        }
        let ops = [
            PrimOp::Add,
            PrimOp::Sub,
            PrimOp::Eq,
            PrimOp::Gt,
            PrimOp::And,
            PrimOp::Or,
        ];
        let op = ops[self.pick(ops.len())];
        let boolean = matches!(op, PrimOp::And | PrimOp::Or);
        let operand = |g: &mut Self| {
            if g.chance(0.7) {
                if boolean {
                    SourceExpr::Bool(g.pick(2) == 0)
                } else {
                    SourceExpr::Nat(g.rng.next_u32() as u64 % 10)
                }
            } else {
                g.expr(env, depth - 1)
            }
        };
        let l = operand(self);
        let r = operand(self);
        SourceExpr::Prim(op, alloc::boxed::Box::new(l), alloc::boxed::Box::new(r))
    }

    fn letrec(&mut self, env: &[(Ident, Shape)], depth: u32) -> SourceExpr {
        let n = 1 + self.pick(self.cfg.max_binding_len.max(1));
        // Choose shapes first so forward references can target manifest
        // definitions: 0 = lambda, 1 = record, 2 = general expression.
        let mut vars = Vec::with_capacity(n);
        let mut manifest = Vec::with_capacity(n);
        for _ in 0..n {
            vars.push(self.fresh("x"));
            manifest.push(match self.pick(5) {
                0 | 1 => 0u8,
                2 => 1,
                _ => 2,
            });
        }
        let mut defs = Vec::with_capacity(n);
        for i in 0..n {
            // In scope: everything outer, binders before this one, and
            // manifest binders from here on (legal forward references).
            let rhs = match manifest[i] {
                0 | 1 => {
                    let mut scope: Vec<(Ident, Shape)> = env.to_vec();
                    for (j, v) in vars.iter().enumerate() {
                        if j < i || manifest[j] != 2 {
                            let shape = if manifest[j] == 0 {
                                Shape::Fun
                            } else {
                                Shape::Opaque
                            };
                            scope.push((v.clone(), shape));
                        }
                    }
                    if manifest[i] == 0 {
                        self.lam(&scope, depth - 1)
                    } else {
                        self.record(&scope)
                    }
                }
                _ => {
                    // General right-hand sides must not see this or later
                    // binders.
                    let mut backward: Vec<(Ident, Shape)> = env.to_vec();
                    for v in vars.iter().take(i) {
                        backward.push((v.clone(), Shape::Opaque));
                    }
                    self.expr(&backward, depth - 1)
                }
            };
            let size = if manifest[i] != 2 && self.chance(self.cfg.known_size_probability) {
                match &rhs {
                    SourceExpr::Lam(..) => SizeIndication::Known(self.model.function_size),
                    SourceExpr::Record(row) => {
                        SizeIndication::Known(self.model.record_size(row.len()))
                    }
                    _ => SizeIndication::Unknown,
                }
            } else {
                SizeIndication::Unknown
            };
            defs.push(Definition {
                var: vars[i].clone(),
                size,
                rhs,
            });
        }
        // The body sees the whole binding with precise shapes.
        let mut scope: Vec<(Ident, Shape)> = env.to_vec();
        for (i, d) in defs.iter().enumerate() {
            let shape = match &d.rhs {
                SourceExpr::Lam(..) => Shape::Fun,
                SourceExpr::Record(row) => {
                    Shape::Rec(row.iter().map(|(f, _)| f.clone()).collect())
                }
                _ => Shape::Opaque,
            };
            scope.push((vars[i].clone(), shape));
        }
        let body = self.expr(&scope, depth - 1);
        SourceExpr::Letrec(SourceBinding(defs), alloc::boxed::Box::new(body))
    }

    /// Plants a fault into a well-formed program, preserving conditions
    /// 1-3 (a wrong size is still a known size).
    fn plant_fault(&mut self, e: SourceExpr) -> SourceExpr {
        match self.pick(4) {
            0 => {
                // Wrong size annotation on some known-size definition.
                if let Some(mutated) = bump_one_known_size(&e, &mut self.rng) {
                    return mutated;
                }
                SourceExpr::select(e, "NoSuchField")
            }
            1 => SourceExpr::select(e, "NoSuchField"),
            2 => {
                // Apply a record to the program's value.
                let q = self.fresh("fault");
                SourceExpr::Letrec(
                    SourceBinding(alloc::vec![Definition {
                        var: q.clone(),
                        size: SizeIndication::Unknown,
                        rhs: SourceExpr::Record(Vec::new()),
                    }]),
                    alloc::boxed::Box::new(SourceExpr::app(SourceExpr::Var(q), e)),
                )
            }
            _ => {
                // Select from a function.
                let q = self.fresh("fault");
                SourceExpr::Letrec(
                    SourceBinding(alloc::vec![Definition {
                        var: q.clone(),
                        size: SizeIndication::Unknown,
                        rhs: SourceExpr::lam("w", e),
                    }]),
                    alloc::boxed::Box::new(SourceExpr::select(
                        SourceExpr::Var(q),
                        "NoSuchField",
                    )),
                )
            }
        }
    }
}

/// Replaces one known size annotation, chosen by the rng, with an
/// incompatible one.
fn bump_one_known_size(e: &SourceExpr, rng: &mut ChaCha8Rng) -> Option<SourceExpr> {
    let mut sites = 0usize;
    count_known(e, &mut sites);
    if sites == 0 {
        return None;
    }
    let target = (rng.next_u32() as usize) % sites;
    let mut seen = 0usize;
    Some(bump_known(e, target, &mut seen))
}

fn count_known(e: &SourceExpr, n: &mut usize) {
    if let SourceExpr::Letrec(b, body) = e {
        for d in &b.0 {
            if matches!(d.size, SizeIndication::Known(_)) {
                *n += 1;
            }
            count_known(&d.rhs, n);
        }
        count_known(body, n);
    } else {
        for_children(e, |c| count_known(c, n));
    }
}

fn bump_known(e: &SourceExpr, target: usize, seen: &mut usize) -> SourceExpr {
    match e {
        SourceExpr::Letrec(b, body) => {
            let defs = b
                .0
                .iter()
                .map(|d| {
                    let size = match d.size {
                        SizeIndication::Known(n) => {
                            let hit = *seen == target;
                            *seen += 1;
                            if hit {
                                SizeIndication::Known(n + 1)
                            } else {
                                SizeIndication::Known(n)
                            }
                        }
                        s => s,
                    };
                    Definition {
                        var: d.var.clone(),
                        size,
                        rhs: bump_known(&d.rhs, target, seen),
                    }
                })
                .collect();
            SourceExpr::Letrec(
                SourceBinding(defs),
                alloc::boxed::Box::new(bump_known(body, target, seen)),
            )
        }
        SourceExpr::Lam(x, b) => SourceExpr::Lam(
            x.clone(),
            alloc::boxed::Box::new(bump_known(b, target, seen)),
        ),
        SourceExpr::App(f, a) => {
            SourceExpr::app(bump_known(f, target, seen), bump_known(a, target, seen))
        }
        SourceExpr::Select(s, f) => SourceExpr::Select(
            alloc::boxed::Box::new(bump_known(s, target, seen)),
            f.clone(),
        ),
        SourceExpr::Prim(op, l, r) => SourceExpr::Prim(
            *op,
            alloc::boxed::Box::new(bump_known(l, target, seen)),
            alloc::boxed::Box::new(bump_known(r, target, seen)),
        ),
        SourceExpr::If(c, t, f) => SourceExpr::If(
            alloc::boxed::Box::new(bump_known(c, target, seen)),
            alloc::boxed::Box::new(bump_known(t, target, seen)),
            alloc::boxed::Box::new(bump_known(f, target, seen)),
        ),
        _ => e.clone(),
    }
}

fn for_children(e: &SourceExpr, mut f: impl FnMut(&SourceExpr)) {
    match e {
        SourceExpr::Lam(_, b) => f(b),
        SourceExpr::App(a, b) => {
            f(a);
            f(b);
        }
        SourceExpr::Select(s, _) => f(s),
        SourceExpr::Prim(_, l, r) => {
            f(l);
            f(r);
        }
        SourceExpr::If(c, t, e2) => {
            f(c);
            f(t);
            f(e2);
        }
        SourceExpr::Letrec(b, body) => {
            for d in &b.0 {
                f(&d.rhs);
            }
            f(body);
        }
        _ => {}
    }
}

/// Generates one closed, well-formed program. The second component tells
/// whether a fault was deliberately planted.
pub fn gen_expr_flagged(cfg: &GenConfig, model: &SizeModel) -> (SourceExpr, bool) {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        model,
        cfg: cfg.clone(),
        counter: 0,
    };
    let raw = g.expr(&[], g.cfg.max_depth);
    // Forward references inside bindings get their sizes inferred; the
    // generator only forward-references manifest definitions, so this
    // cannot fail.
    let annotated = infer_sizes_in_expr(&raw, model)
        .expect("generated forward references target manifest definitions");
    let planted = g.chance(g.cfg.faulty_rate);
    let out = if planted {
        g.plant_fault(annotated)
    } else {
        annotated
    };
    debug_assert!(
        check_wellformed(&out).is_empty(),
        "generator must produce well-formed terms"
    );
    (out, planted)
}

/// Generates one closed, well-formed program.
pub fn gen_expr(cfg: &GenConfig, model: &SizeModel) -> SourceExpr {
    gen_expr_flagged(cfg, model).0
}

/// Generates a reachable target configuration: the translation of a
/// generated program advanced by a random number of deterministic steps.
pub fn gen_target_config(cfg: &GenConfig, model: &SizeModel) -> Configuration {
    use crate::target::{step_deterministic, TargetStep};
    let (e, _) = gen_expr_flagged(cfg, model);
    let mut c = translate_program(&e).expect("generated programs are closed and well-formed");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7467_6574);
    let steps = (rng.next_u32() % 40) as usize;
    for _ in 0..steps {
        match step_deterministic(&c, model) {
            TargetStep::Stepped(c2, _) => c = c2,
            _ => break,
        }
    }
    c
}

/// Generates a closed non-variable source value.
pub fn gen_closed_value(seed: u64, model: &SizeModel, prims: bool) -> SourceExpr {
    let cfg = GenConfig {
        seed,
        max_depth: 3,
        prims_enabled: prims,
        ..GenConfig::default()
    };
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed ^ 0x7661_6c75),
        model,
        cfg,
        counter: 0,
    };
    if g.pick(3) == 0 {
        // At top level the only closed record is the empty one.
        SourceExpr::Record(Vec::new())
    } else {
        g.lam(&[], 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_terms_are_closed_and_wellformed() {
        let model = SizeModel::default();
        for seed in 0..200 {
            let cfg = GenConfig {
                seed,
                prims_enabled: seed % 2 == 0,
                faulty_rate: 0.3,
                ..GenConfig::default()
            };
            let (e, _) = gen_expr_flagged(&cfg, &model);
            assert!(
                check_wellformed(&e).is_empty(),
                "seed {seed} produced an ill-formed term"
            );
            assert!(
                crate::source::free_vars(&e).is_empty(),
                "seed {seed} produced an open term"
            );
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let model = SizeModel::default();
        let cfg = GenConfig {
            seed: 42,
            ..GenConfig::default()
        };
        assert_eq!(gen_expr(&cfg, &model), gen_expr(&cfg, &model));
    }

    #[test]
    fn depth_zero_yields_a_value() {
        let model = SizeModel::default();
        let cfg = GenConfig {
            seed: 0,
            max_depth: 0,
            ..GenConfig::default()
        };
        assert!(gen_expr(&cfg, &model).is_value());
    }

    #[test]
    fn target_configs_roundtrip_through_the_printer() {
        let model = SizeModel::default();
        for seed in 0..50 {
            let cfg = GenConfig {
                seed,
                ..GenConfig::default()
            };
            let c = gen_target_config(&cfg, &model);
            let printed = crate::target::print_config(&c);
            let c2 = crate::target::parse_target_config(&printed).unwrap();
            assert_eq!(c, c2, "seed {seed}");
        }
    }

    #[test]
    fn closed_values_really_are_closed_values(){
        let model = SizeModel::default();
        for seed in 0..100 {
            let v = gen_closed_value(seed, &model, seed % 2 == 0);
            assert!(v.is_value());
            assert!(!matches!(v, SourceExpr::Var(_)));
            assert!(crate::source::free_vars(&v).is_empty());
        }
    }
}
