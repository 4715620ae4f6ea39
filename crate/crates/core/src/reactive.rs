//! State transitions: normal form, patch generation and patch application.
//!
//! A step runs an update goal against the current substitution, collects
//! every `Set` from every answer, turns them into a [`Patch`] of
//! (bound variable, ground value) entries, and applies the patch. All
//! right-hand sides are read at the current timestep; the only exception is
//! recursive stratification, where an update whose target lies inside the
//! structure of another update's target contributes its own result to the
//! outer one and is then dropped.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::goal::{conj, Goal};
use crate::search::{run_all_with, Answer, SearchConfig, SearchError};
use crate::subst::{ReifyError, Substitution};
use crate::term::{Compound, Key, LVar, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UpdateError {
    #[error("conflicting assignments to {target}: {first} vs {second}")]
    Conflict { target: LVar, first: Term, second: Term },
    #[error("set target {0} does not resolve to a variable bound in the current state")]
    TargetUnbound(Term),
    #[error("update goal produced no answers")]
    NoAnswers,
    #[error("update value is not ground: {0}")]
    NotGround(#[from] ReifyError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("precondition violated: {0}")]
    Precondition(alloc::string::String),
}

/// One (target, value) pair of a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchEntry {
    pub target: LVar,
    pub value: Term,
}

/// Entries are sorted by target id and carry fully ground values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Patch {
    pub entries: Vec<PatchEntry>,
}

impl Patch {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Knobs for patch generation. The default is the full semantics; the law
/// checker flips `resolve_classes` off to confirm the laws can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchConfig {
    /// Assign every bound member of a target's equivalence class.
    pub resolve_classes: bool,
}

impl Default for PatchConfig {
    fn default() -> Self {
        PatchConfig { resolve_classes: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Condition 1: a variable bound to another variable.
    BoundToVariable(LVar),
    /// Condition 1: a variable reachable from the root but unbound.
    Unbound(LVar),
    /// Condition 2: a compound holding a non-variable under `key`.
    InlineValue { owner: LVar, key: Key },
    /// Condition 3: a variable reachable along two paths.
    Shared(LVar),
    /// Condition 3: a variable reachable from itself.
    Cycle(LVar),
}

/// Binds `var` to `value`, giving every atom and every compound its own
/// fresh variable. `value` must be ground.
fn bind_normalized(s: Substitution, var: &LVar, value: &Term) -> Result<Substitution, ReifyError> {
    match value {
        Term::Var(v) => Err(ReifyError::FreeVariable(v.clone())),
        Term::Atom(_) => Ok(s.put(var, value.clone())),
        Term::Compound(c) => {
            let mut s = s;
            let mut entries = BTreeMap::new();
            for (k, child) in c.iter() {
                let cv = LVar::fresh();
                s = bind_normalized(s, &cv, child)?;
                entries.insert(k.clone(), Term::Var(cv));
            }
            Ok(s.put(var, Term::Compound(Compound::new(entries))))
        }
    }
}

/// Loads a ground value into an empty substitution under a new root.
pub fn normalize(value: &Term) -> Result<(Substitution, LVar), ReifyError> {
    let root = LVar::named("model");
    let s = bind_normalized(Substitution::new(), &root, value)?;
    Ok((s, root))
}

pub fn check_normal_form(s: &Substitution, root: &LVar) -> Vec<Violation> {
    let mut out = Vec::new();
    for (v, t) in s.bindings() {
        match t {
            Term::Var(_) => out.push(Violation::BoundToVariable(v.clone())),
            Term::Compound(c) => {
                for (k, child) in c.iter() {
                    if !child.is_var() {
                        out.push(Violation::InlineValue { owner: v.clone(), key: k.clone() });
                    }
                }
            }
            Term::Atom(_) => {}
        }
    }
    let mut seen = BTreeSet::new();
    // (variable, its ancestors on the current path)
    let mut stack: Vec<(LVar, Vec<LVar>)> = alloc::vec![(root.clone(), Vec::new())];
    while let Some((v, ancestors)) = stack.pop() {
        if ancestors.contains(&v) {
            out.push(Violation::Cycle(v));
            continue;
        }
        if !seen.insert(v.clone()) {
            out.push(Violation::Shared(v));
            continue;
        }
        let Some(t) = s.get(&v) else {
            out.push(Violation::Unbound(v));
            continue;
        };
        let mut path = ancestors;
        path.push(v.clone());
        let mut children = Vec::new();
        t.collect_children(&mut children);
        for c in children.into_iter().rev() {
            stack.push((c, path.clone()));
        }
    }
    out
}

impl Term {
    /// Variables held directly by this term (one level, with repeats).
    fn collect_children(&self, out: &mut Vec<LVar>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::Atom(_) => {}
            Term::Compound(c) => {
                for child in c.values() {
                    match child {
                        Term::Var(v) => out.push(v.clone()),
                        other => other.collect_children(out),
                    }
                }
            }
        }
    }
}

/// Parent links of the pre-state's variable tree.
struct Ancestry {
    parent: BTreeMap<LVar, LVar>,
}

impl Ancestry {
    fn of(s: &Substitution) -> Ancestry {
        let mut parent = BTreeMap::new();
        for (v, t) in s.bindings() {
            let mut children = Vec::new();
            t.collect_children(&mut children);
            for c in children {
                parent.entry(c).or_insert_with(|| v.clone());
            }
        }
        Ancestry { parent }
    }

    /// `true` when `inner` lies strictly inside the structure of `outer`.
    fn strictly_inside(&self, inner: &LVar, outer: &LVar) -> bool {
        let mut cur = inner;
        let mut steps = 0;
        while let Some(p) = self.parent.get(cur) {
            if p == outer {
                return true;
            }
            cur = p;
            steps += 1;
            if steps > self.parent.len() {
                return false;
            }
        }
        false
    }
}

/// One `Set` occurrence after target resolution.
struct Source {
    answer: usize,
    rhs: Term,
    targets: Vec<LVar>,
}

struct PatchBuilder<'a> {
    answers: &'a [Answer],
    ancestry: Ancestry,
    sources: Vec<Source>,
    by_target: BTreeMap<LVar, Vec<usize>>,
    values: BTreeMap<LVar, Term>,
    in_progress: BTreeSet<LVar>,
}

/// Pre-state variables in the class of `lhs` within `answer`.
fn resolve_targets(pre: &Substitution, answer: &Substitution, lhs: &LVar, cfg: &PatchConfig) -> Vec<LVar> {
    let lhs_term = Term::Var(lhs.clone());
    let (last, _) = answer.walk_binding(&lhs_term);
    let mut targets = Vec::new();
    if let Term::Var(last) = &last {
        if pre.is_bound(last) {
            targets.push(last.clone());
        }
        if cfg.resolve_classes {
            let last_term = Term::Var(last.clone());
            let candidates = answer.chain(&lhs_term).into_iter().chain(answer.rebound().cloned());
            for v in candidates {
                if pre.is_bound(&v) && !targets.contains(&v) && answer.descendant(&v, &last_term) {
                    targets.push(v);
                }
            }
        }
    }
    targets.sort();
    targets
}

impl<'a> PatchBuilder<'a> {
    fn value_of(&mut self, target: &LVar) -> Result<Term, UpdateError> {
        if let Some(v) = self.values.get(target) {
            return Ok(v.clone());
        }
        if !self.in_progress.insert(target.clone()) {
            return Err(UpdateError::Precondition(alloc::format!("cyclic stratified update through {}", target)));
        }
        let mut agreed: Option<Term> = None;
        for idx in self.by_target[target].clone() {
            let (answer, rhs, targets) = {
                let src = &self.sources[idx];
                (src.answer, src.rhs.clone(), src.targets.clone())
            };
            let value = self.stratified_reify(answer, &rhs, &targets, 0)?;
            match &agreed {
                None => agreed = Some(value),
                Some(prev) if *prev == value => {}
                Some(prev) => return Err(UpdateError::Conflict { target: target.clone(), first: prev.clone(), second: value }),
            }
        }
        self.in_progress.remove(target);
        let value = agreed.expect("target without sources");
        self.values.insert(target.clone(), value.clone());
        Ok(value)
    }

    /// Reifies `t` in the answer's substitution, except that a variable
    /// resolving to another update's target strictly inside `owners` takes
    /// that update's result.
    fn stratified_reify(&mut self, answer: usize, t: &Term, owners: &[LVar], depth: usize) -> Result<Term, UpdateError> {
        if depth > 100_000 {
            return Err(ReifyError::TooDeep(100_000).into());
        }
        let s = &self.answers[answer].substitution;
        if t.is_var() {
            let chain = s.chain(t);
            for v in &chain {
                if self.by_target.contains_key(v)
                    && !owners.contains(v)
                    && owners.iter().any(|o| self.ancestry.strictly_inside(v, o))
                {
                    let v = v.clone();
                    return self.value_of(&v);
                }
            }
        }
        match s.walk(t) {
            Term::Var(v) => Err(ReifyError::FreeVariable(v).into()),
            Term::Atom(a) => Ok(Term::Atom(a)),
            Term::Compound(c) => {
                let mut entries = BTreeMap::new();
                for (k, child) in c.iter() {
                    entries.insert(k.clone(), self.stratified_reify(answer, child, owners, depth + 1)?);
                }
                Ok(Term::Compound(Compound::new(entries)))
            }
        }
    }
}

/// Builds the patch for all `Set`s of all answers against `pre`.
pub fn build_patch(pre: &Substitution, answers: &[Answer]) -> Result<Patch, UpdateError> {
    build_patch_with(pre, answers, &PatchConfig::default())
}

pub fn build_patch_with(pre: &Substitution, answers: &[Answer], cfg: &PatchConfig) -> Result<Patch, UpdateError> {
    let mut sources = Vec::new();
    let mut by_target: BTreeMap<LVar, Vec<usize>> = BTreeMap::new();
    for (ai, answer) in answers.iter().enumerate() {
        for (lhs, rhs) in &answer.sets {
            let targets = resolve_targets(pre, &answer.substitution, lhs, cfg);
            if targets.is_empty() {
                return Err(UpdateError::TargetUnbound(Term::Var(lhs.clone())));
            }
            for t in &targets {
                by_target.entry(t.clone()).or_default().push(sources.len());
            }
            sources.push(Source { answer: ai, rhs: rhs.clone(), targets });
        }
    }
    let mut builder = PatchBuilder {
        answers,
        ancestry: Ancestry::of(pre),
        sources,
        by_target,
        values: BTreeMap::new(),
        in_progress: BTreeSet::new(),
    };
    let targets: Vec<LVar> = builder.by_target.keys().cloned().collect();
    let mut entries = Vec::new();
    for t in &targets {
        let value = builder.value_of(t)?;
        let nested = targets.iter().any(|outer| outer != t && builder.ancestry.strictly_inside(t, outer));
        if !nested {
            entries.push(PatchEntry { target: t.clone(), value });
        }
    }
    Ok(Patch { entries })
}

/// Drops the bindings of every variable held by `t`, recursively.
fn drop_structure(mut s: Substitution, t: &Term) -> Substitution {
    let mut children = Vec::new();
    t.collect_children(&mut children);
    for c in children {
        if let Some(ct) = s.get(&c).cloned() {
            s = drop_structure(s.remove(&c), &ct);
        }
    }
    s
}

fn overwrite(s: Substitution, var: &LVar, new: &Term) -> Result<Substitution, ReifyError> {
    let old = s.get(var).cloned();
    match (old, new) {
        (Some(Term::Compound(oc)), Term::Compound(nc)) => {
            let mut s = s;
            let mut entries = BTreeMap::new();
            let mut reused_all = oc.len() == nc.len();
            for (k, nv) in nc.iter() {
                match oc.get(k) {
                    Some(Term::Var(cv)) => {
                        s = overwrite(s, cv, nv)?;
                        entries.insert(k.clone(), Term::Var(cv.clone()));
                    }
                    _ => {
                        reused_all = false;
                        let cv = LVar::fresh();
                        s = bind_normalized(s, &cv, nv)?;
                        entries.insert(k.clone(), Term::Var(cv));
                    }
                }
            }
            for (k, ov) in oc.iter() {
                if !nc.contains(k) {
                    s = drop_structure(s, ov);
                }
            }
            if reused_all {
                Ok(s)
            } else {
                Ok(s.put(var, Term::Compound(Compound::new(entries))))
            }
        }
        (Some(Term::Atom(oa)), Term::Atom(na)) if oa == *na => Ok(s),
        (old, new) => {
            let s = match &old {
                Some(o) => drop_structure(s, o),
                None => s,
            };
            bind_normalized(s, var, new)
        }
    }
}

/// Applies patch entries in target order. Existing variables are reused
/// wherever old and new structure overlap; new structure gets fresh
/// normalized variables.
pub fn apply_patch(s: &Substitution, p: &Patch) -> Result<Substitution, ReifyError> {
    let mut entries = p.entries.clone();
    entries.sort_by(|a, b| a.target.cmp(&b.target));
    let mut out = s.clone();
    for e in &entries {
        out = overwrite(out, &e.target, &e.value)?;
    }
    let generation = s.generation() + 1;
    Ok(out.with_generation(generation))
}

/// Substitution, model root, view goals and queued updates.
#[derive(Clone)]
pub struct ReactiveSystem {
    pub substitution: Substitution,
    pub model_root: LVar,
    pub views: Vec<(LVar, Goal)>,
    pub pending_updates: VecDeque<Goal>,
    pub search: SearchConfig,
}

impl core::fmt::Debug for ReactiveSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ReactiveSystem")
            .field("generation", &self.substitution.generation())
            .field("model", &self.substitution.reify_partial(&Term::Var(self.model_root.clone())))
            .finish()
    }
}

impl ReactiveSystem {
    pub fn new(model: &Term) -> Result<ReactiveSystem, ReifyError> {
        let (substitution, model_root) = normalize(model)?;
        Ok(ReactiveSystem {
            substitution,
            model_root,
            views: Vec::new(),
            pending_updates: VecDeque::new(),
            search: SearchConfig::default(),
        })
    }

    pub fn model(&self) -> Result<Term, ReifyError> {
        self.substitution.reify(&Term::Var(self.model_root.clone()))
    }

    pub fn model_var(&self) -> Term {
        Term::Var(self.model_root.clone())
    }

    pub fn generation(&self) -> u64 {
        self.substitution.generation()
    }

    pub fn add_view(&mut self, view_var: LVar, goal: Goal) {
        self.views.push((view_var, goal));
    }

    /// Reified assignments of every registered view variable.
    pub fn view_states(&self) -> Result<Vec<Vec<Term>>, UpdateError> {
        let mut out = Vec::new();
        for (v, g) in &self.views {
            let answers = run_all_with(&self.substitution, g, &self.search)?;
            let mut values = Vec::new();
            for a in answers {
                values.push(a.substitution.reify(&Term::Var(v.clone()))?);
            }
            out.push(values);
        }
        Ok(out)
    }

    pub fn normal_form_violations(&self) -> Vec<Violation> {
        check_normal_form(&self.substitution, &self.model_root)
    }

    /// One timestep: `context` goals (a view-tree path) conjoined with
    /// `update`. Any error leaves the state as it was.
    pub fn step(&self, update: &Goal, context: &[Goal]) -> Result<ReactiveSystem, UpdateError> {
        self.step_with(update, context, &PatchConfig::default())
    }

    pub fn step_with(&self, update: &Goal, context: &[Goal], cfg: &PatchConfig) -> Result<ReactiveSystem, UpdateError> {
        let goal = if context.is_empty() {
            update.clone()
        } else {
            conj(context.iter().filter(|g| !g.is_set()).cloned().chain([update.clone()]))
        };
        let answers = run_all_with(&self.substitution, &goal, &self.search)?;
        if answers.is_empty() {
            log::debug!("update goal produced no answers; state unchanged");
            return Err(UpdateError::NoAnswers);
        }
        let patch = build_patch_with(&self.substitution, &answers, cfg)?;
        let substitution = apply_patch(&self.substitution, &patch)?;
        Ok(ReactiveSystem { substitution, ..self.clone() })
    }

    pub fn enqueue(&mut self, update: Goal) {
        self.pending_updates.push_back(update);
    }

    /// Runs queued updates in order, stopping at the first failure (which
    /// is left at the head of the queue).
    pub fn run_pending(&mut self) -> Result<usize, UpdateError> {
        let mut done = 0;
        while let Some(u) = self.pending_updates.front().cloned() {
            let next = self.step(&u, &[])?;
            self.substitution = next.substitution;
            self.pending_updates.pop_front();
            done += 1;
        }
        Ok(done)
    }
}
