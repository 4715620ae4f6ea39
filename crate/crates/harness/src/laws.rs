//! Randomized checks of the update laws against the running engine.
//!
//! Each law runs under a proptest runner seeded from the user's seed, so a
//! run is reproducible and failures come back shrunk.

// the error side carries the shrunk counterexample by value
#![allow(clippy::result_large_err)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};
use rekanren_core::goal::{conj, eq, fresh, membero, set, Goal};
use rekanren_core::reactive::PatchConfig;
use rekanren_core::term::{cons, list, LVar, Term};
use rekanren_core::{ReactiveSystem, UpdateError};
use serde::Serialize;

use crate::registry::remove_lorem;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Patch only the final variable of each `set` target.
    SkipClassResolution,
}

#[derive(Clone, Debug)]
pub struct LawConfig {
    pub seed: u64,
    pub cases: u32,
    pub mutation: Option<Mutation>,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig { seed: DEFAULT_SEED, cases: 1000, mutation: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawResult {
    pub law: &'static str,
    pub cases: u32,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub seed: u64,
    pub cases: u32,
    pub results: Vec<LawResult>,
}

impl LawReport {
    pub fn violations(&self) -> usize {
        self.results.iter().filter(|r| !r.passed).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("laws: seed {} cases {}\n", self.seed, self.cases);
        for r in &self.results {
            out.push_str(&format!("  {} {}\n", if r.passed { "ok  " } else { "FAIL" }, r.law));
            if let Some(m) = &r.message {
                out.push_str(&format!("       {}\n", m));
            }
            if let Some(c) = &r.counterexample {
                out.push_str(&format!("       counterexample: {}\n", c));
            }
        }
        out.push_str(&format!("{} violations\n", self.violations()));
        out
    }
}

pub fn arb_atom() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..4i32).prop_map(Term::from),
        prop::sample::select(vec!["lorem", "ipsum", "dolor"]).prop_map(Term::from),
        any::<bool>().prop_map(Term::from),
        Just(Term::nil()),
    ]
}

/// Ground models: atoms, records with keys `a`..`c`, short lists.
pub fn arb_model() -> BoxedStrategy<Term> {
    arb_atom()
        .prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                prop::collection::btree_map(prop::sample::select(vec!["a", "b", "c"]), inner.clone(), 1..=3)
                    .prop_map(Term::record),
                prop::collection::vec(inner, 0..4).prop_map(list),
            ]
        })
        .boxed()
}

/// Variables of the state tree below `root`, root first.
pub fn tree_vars(sys: &ReactiveSystem) -> Vec<LVar> {
    let mut out = vec![];
    let mut stack = vec![sys.model_root.clone()];
    while let Some(v) = stack.pop() {
        if let Some(Term::Compound(c)) = sys.substitution.get(&v) {
            let kids: Vec<LVar> = c.values().filter_map(|t| t.as_var().cloned()).collect();
            stack.extend(kids.into_iter().rev());
        }
        out.push(v);
    }
    out
}

fn parents(sys: &ReactiveSystem) -> BTreeMap<LVar, LVar> {
    let mut m = BTreeMap::new();
    for (v, t) in sys.substitution.bindings() {
        if let Some(c) = t.as_compound() {
            for child in c.values().filter_map(Term::as_var) {
                m.insert(child.clone(), v.clone());
            }
        }
    }
    m
}

fn above(parents: &BTreeMap<LVar, LVar>, a: &LVar, b: &LVar) -> bool {
    let mut cur = Some(b.clone());
    while let Some(c) = cur {
        if &c == a {
            return true;
        }
        cur = parents.get(&c).cloned();
    }
    false
}

struct Ctx {
    cfg: PatchConfig,
}

impl Ctx {
    fn step(&self, sys: &ReactiveSystem, g: &Goal) -> Result<ReactiveSystem, UpdateError> {
        sys.step_with(g, &[], &self.cfg)
    }
}

fn reify(sys: &ReactiveSystem, v: &LVar) -> Result<Term, TestCaseError> {
    sys.substitution.reify(&Term::Var(v.clone())).map_err(|e| TestCaseError::fail(e.to_string()))
}

fn normal(sys: &ReactiveSystem) -> Result<(), TestCaseError> {
    let v = sys.normal_form_violations();
    prop_assert!(v.is_empty(), "normal form violated: {:?}", v);
    Ok(())
}

fn ok<T>(r: Result<T, UpdateError>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(format!("update rejected: {}", e)))
}

/// proptest's own error type, counterexample included.
type LawRun<T> = Result<(), TestError<T>>;

fn field(sys: &ReactiveSystem, name: &str) -> LVar {
    let c = sys.substitution.get(&sys.model_root).and_then(Term::as_compound).expect("record model");
    c.get_name(name).and_then(Term::as_var).expect("normalized field").clone()
}

fn put_get(ctx: &Ctx, runner: &mut TestRunner) -> LawRun<(Term, usize, Term, usize, bool)> {
    runner.run(&(arb_model(), any::<usize>(), arb_model(), any::<usize>(), any::<bool>()), |(model, i, value, j, from_var)| {
        let sys = ReactiveSystem::new(&model).unwrap();
        let vars = tree_vars(&sys);
        let x = vars[i % vars.len()].clone();
        let (rhs, want) = if from_var {
            let y = vars[j % vars.len()].clone();
            (Term::Var(y.clone()), reify(&sys, &y)?)
        } else {
            (value.clone(), value)
        };
        let next = ok(ctx.step(&sys, &set(&x, rhs)))?;
        prop_assert_eq!(reify(&next, &x)?, want);
        normal(&next)
    })
}

fn put_put(ctx: &Ctx, runner: &mut TestRunner) -> LawRun<(Term, usize, Term, Option<Term>)> {
    let strategy = (arb_model(), any::<usize>(), arb_atom(), prop::option::of(arb_atom()));
    runner.run(&strategy, |(model, i, v, w)| {
        let mut sys = ReactiveSystem::new(&model).unwrap();
        let vars = tree_vars(&sys);
        let x = vars[i % vars.len()].clone();
        let w = w.unwrap_or_else(|| v.clone());
        let before = sys.substitution.clone();
        let result = ctx.step(&sys, &conj([set(&x, v.clone()), set(&x, w.clone())]));
        if v == w {
            let next = ok(result)?;
            prop_assert_eq!(reify(&next, &x)?, v);
            normal(&next)?;
        } else {
            prop_assert!(matches!(result, Err(UpdateError::Conflict { .. })), "conflicting sets were accepted");
            // a queued conflicting update leaves the live state alone
            sys.enqueue(conj([set(&x, v), set(&x, w)]));
            prop_assert!(sys.run_pending().is_err());
            prop_assert_eq!(&sys.substitution, &before);
        }
        Ok(())
    })
}

fn equivalence_class(ctx: &Ctx, runner: &mut TestRunner) -> LawRun<(Term, Term, Term, Term, Term)> {
    let strategy = (arb_model(), arb_model(), arb_model(), arb_atom(), arb_model());
    runner.run(&strategy, |(shared, other, z, head, tail)| {
        // x = y then x := z
        let sys = ReactiveSystem::new(&Term::record([("a", shared.clone()), ("b", shared), ("c", other.clone())])).unwrap();
        let (x, y, c) = (field(&sys, "a"), field(&sys, "b"), field(&sys, "c"));
        let next = ok(ctx.step(&sys, &conj([eq(&x, &y), set(&x, z.clone())])))?;
        prop_assert_eq!(reify(&next, &x)?, z.clone());
        prop_assert_eq!(reify(&next, &y)?, z.clone());
        prop_assert_eq!(reify(&next, &c)?, other);
        normal(&next)?;

        // setting a destructured head through a fresh variable
        let sys = ReactiveSystem::new(&cons(head, tail.clone())).unwrap();
        let m = sys.model_var();
        let z2 = z.clone();
        let g = fresh(move |[h, t]| conj([eq(m.clone(), cons(&h, &t)), set(&h, z2.clone())]));
        let next = ok(ctx.step(&sys, &g))?;
        prop_assert_eq!(next.model().unwrap(), cons(z, tail));
        normal(&next)
    })
}

fn subtree(sys: &ReactiveSystem, root: &LVar) -> Vec<LVar> {
    let ps = parents(sys);
    tree_vars(sys).into_iter().filter(|v| above(&ps, root, v)).collect()
}

fn swap(ctx: &Ctx, runner: &mut TestRunner) -> LawRun<(Term, Term, usize, usize)> {
    runner.run(&(arb_model(), arb_model(), any::<usize>(), any::<usize>()), |(a, b, i, j)| {
        let sys = ReactiveSystem::new(&Term::record([("a", a), ("b", b)])).unwrap();
        let (xs, ys) = (subtree(&sys, &field(&sys, "a")), subtree(&sys, &field(&sys, "b")));
        let x = xs[i % xs.len()].clone();
        let y = ys[j % ys.len()].clone();
        let (xv, yv) = (reify(&sys, &x)?, reify(&sys, &y)?);
        let next = ok(ctx.step(&sys, &conj([set(&x, &y), set(&y, &x)])))?;
        prop_assert_eq!(reify(&next, &x)?, yv);
        prop_assert_eq!(reify(&next, &y)?, xv);
        normal(&next)
    })
}

fn deterministic_assignment(ctx: &Ctx, runner: &mut TestRunner) -> LawRun<Vec<Term>> {
    runner.run(&prop::collection::vec(arb_atom(), 0..8), |items| {
        let sys = ReactiveSystem::new(&list(items.clone())).unwrap();
        let m = sys.model_var();
        let g = fresh(move |[y]| conj([membero(m.clone(), &y), set(&y, cons(&y, &y))]));
        match ctx.step(&sys, &g) {
            Ok(next) => {
                let want = list(items.iter().map(|t| cons(t.clone(), t.clone())));
                prop_assert_eq!(next.model().unwrap(), want);
                normal(&next)?;
                // the same goal twice gives the same state
                let again = ok(ctx.step(
                    &sys,
                    &fresh({
                        let m = sys.model_var();
                        move |[y]| conj([membero(m.clone(), &y), set(&y, cons(&y, &y))])
                    }),
                ))?;
                prop_assert_eq!(again.model().unwrap(), next.model().unwrap());
            }
            Err(e) => {
                prop_assert!(items.is_empty(), "rejected: {}", e);
            }
        }
        Ok(())
    })
}

fn recursive_stratification(ctx: &Ctx, runner: &mut TestRunner) -> LawRun<Vec<Term>> {
    let word = prop::sample::select(vec!["lorem", "ipsum", "dolor"]).prop_map(Term::from);
    runner.run(&prop::collection::vec(word, 0..=16), |items| {
        let sys = ReactiveSystem::new(&list(items.clone())).unwrap();
        let kept: Vec<Term> = items.iter().filter(|t| **t != Term::from("lorem")).cloned().collect();
        match ctx.step(&sys, &remove_lorem(sys.model_var())) {
            Ok(next) => {
                prop_assert_eq!(next.model().unwrap(), list(kept));
                normal(&next)?;
            }
            Err(e) => {
                prop_assert!(matches!(e, UpdateError::NoAnswers), "rejected: {}", e);
                prop_assert_eq!(kept.len(), items.len());
            }
        }
        Ok(())
    })
}

fn result<T: std::fmt::Debug>(law: &'static str, cases: u32, r: Result<(), TestError<T>>) -> LawResult {
    match r {
        Ok(()) => LawResult { law, cases, passed: true, message: None, counterexample: None },
        Err(TestError::Fail(reason, value)) => LawResult {
            law,
            cases,
            passed: false,
            message: Some(renumber_vars(&reason.to_string())),
            counterexample: Some(renumber_vars(&format!("{:?}", value))),
        },
        Err(TestError::Abort(reason)) => {
            LawResult { law, cases, passed: false, message: Some(format!("aborted: {}", reason)), counterexample: None }
        }
    }
}

/// Variable ids are process-global; number them by first appearance so
/// that a report depends only on the seed.
fn renumber_vars(text: &str) -> String {
    let mut seen: Vec<&str> = Vec::new();
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(i) = rest.find('#') {
        let (head, tail) = rest.split_at(i + 1);
        out.push_str(head);
        let digits = tail.find(|c: char| !c.is_ascii_digit()).unwrap_or(tail.len());
        if digits > 0 {
            let id = &tail[..digits];
            let n = seen.iter().position(|s| *s == id).unwrap_or_else(|| {
                seen.push(id);
                seen.len() - 1
            });
            out.push_str(&n.to_string());
        }
        rest = &tail[digits..];
    }
    out.push_str(rest);
    out
}

fn runner(seed: u64, law: u64, cases: u32) -> TestRunner {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&law.to_le_bytes());
    let config = Config { cases, failure_persistence: None, rng_algorithm: RngAlgorithm::ChaCha, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes))
}

pub const LAWS: [&str; 6] =
    ["put-get", "put-put", "equivalence-class", "swap", "deterministic-assignment", "recursive-stratification"];

pub fn check_laws(cfg: &LawConfig) -> LawReport {
    let mut results = Vec::new();
    if cfg.cases > 0 {
        let ctx = Ctx { cfg: PatchConfig { resolve_classes: cfg.mutation != Some(Mutation::SkipClassResolution) } };
        let n = cfg.cases;
        let r = |i: u64| runner(cfg.seed, i, n);
        results.push(result(LAWS[0], n, put_get(&ctx, &mut r(0))));
        results.push(result(LAWS[1], n, put_put(&ctx, &mut r(1))));
        results.push(result(LAWS[2], n, equivalence_class(&ctx, &mut r(2))));
        results.push(result(LAWS[3], n, swap(&ctx, &mut r(3))));
        results.push(result(LAWS[4], n, deterministic_assignment(&ctx, &mut r(4))));
        results.push(result(LAWS[5], n, recursive_stratification(&ctx, &mut r(5))));
    }
    LawReport { seed: cfg.seed, cases: cfg.cases, results }
}
