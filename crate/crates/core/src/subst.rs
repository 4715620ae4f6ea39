//! Persistent substitution and provenance-preserving unification.
//!
//! Unification differs from the textbook procedure in one respect: when two
//! bound variables are unified, one of them is rebound to the other so that
//! both walk to the same variable. The fact that they were unified survives
//! even when their values were already equal, and reactive updates later use
//! it to find every member of an equivalence class.

use alloc::vec::Vec;
use rpds::{ListSync, RedBlackTreeMapSync};

use crate::term::{Compound, LVar, Term};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReifyError {
    #[error("free variable {0} in output position")]
    FreeVariable(LVar),
    #[error("term nesting exceeds {0} levels (binding cycle?)")]
    TooDeep(usize),
}

const REIFY_DEPTH_LIMIT: usize = 100_000;

#[derive(Clone, Default)]
pub struct Substitution {
    bindings: RedBlackTreeMapSync<LVar, Term>,
    // bound variables whose binding was replaced by unification, most recent first
    rebound: ListSync<LVar>,
    generation: u64,
}

impl core::fmt::Debug for Substitution {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_map().entries(self.bindings.iter()).finish()
    }
}

impl PartialEq for Substitution {
    /// Equal bindings; generation and rebinding history are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.bindings.ptr_eq(&other.bindings) || self.bindings == other.bindings
    }
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub(crate) fn with_generation(mut self, generation: u64) -> Substitution {
        self.generation = generation;
        self
    }

    pub fn len(&self) -> usize {
        self.bindings.size()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, v: &LVar) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn is_bound(&self, v: &LVar) -> bool {
        self.bindings.contains_key(v)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&LVar, &Term)> {
        self.bindings.iter()
    }

    /// Variables rebound by unification since this substitution's lineage
    /// started, most recent first.
    pub fn rebound(&self) -> impl Iterator<Item = &LVar> {
        self.rebound.iter()
    }

    /// Adds `v ↦ t`. Panics when `v` is already bound.
    pub fn extend(&self, v: &LVar, t: impl Into<Term>) -> Substitution {
        assert!(!self.is_bound(v), "extend: {} is already bound", v);
        Substitution {
            bindings: self.bindings.insert(v.clone(), t.into()),
            rebound: self.rebound.clone(),
            generation: self.generation,
        }
    }

    /// Replaces the binding of an already bound variable and records it.
    pub(crate) fn rebind(&self, v: &LVar, t: Term) -> Substitution {
        debug_assert!(self.is_bound(v));
        Substitution {
            bindings: self.bindings.insert(v.clone(), t),
            rebound: self.rebound.push_front(v.clone()),
            generation: self.generation,
        }
    }

    /// Overwrites or inserts without bookkeeping. Used by patch application.
    pub(crate) fn put(&self, v: &LVar, t: Term) -> Substitution {
        Substitution { bindings: self.bindings.insert(v.clone(), t), rebound: self.rebound.clone(), generation: self.generation }
    }

    pub(crate) fn remove(&self, v: &LVar) -> Substitution {
        Substitution { bindings: self.bindings.remove(v), rebound: self.rebound.clone(), generation: self.generation }
    }

    /// Follows bindings from `t` and returns the final (bound variable, value)
    /// pair. A free variable or a non-variable term yields `(t', t')`.
    pub fn walk_binding(&self, t: &Term) -> (Term, Term) {
        let Term::Var(start) = t else {
            return (t.clone(), t.clone());
        };
        let mut var = start;
        let mut steps = 0usize;
        loop {
            match self.bindings.get(var) {
                None => return (Term::Var(var.clone()), Term::Var(var.clone())),
                Some(Term::Var(next)) => {
                    steps += 1;
                    assert!(steps <= self.bindings.size(), "binding cycle through {}", start);
                    var = next;
                }
                Some(value) => return (Term::Var(var.clone()), value.clone()),
            }
        }
    }

    pub fn walk(&self, t: &Term) -> Term {
        self.walk_binding(t).1
    }

    /// Every variable visited while walking `t`, in order (including `t`).
    pub fn chain(&self, t: &Term) -> Vec<LVar> {
        let mut out = Vec::new();
        let Term::Var(mut var) = t.clone() else {
            return out;
        };
        loop {
            out.push(var.clone());
            match self.bindings.get(&var) {
                Some(Term::Var(next)) if !out.contains(next) => var = next.clone(),
                _ => return out,
            }
        }
    }

    /// `true` iff `x = y`, or `x` is bound to some `z` with `descendant(z, y)`.
    pub fn descendant(&self, x: &LVar, y: &Term) -> bool {
        let mut cur = Term::Var(x.clone());
        let mut steps = 0usize;
        loop {
            if cur.identical(y) {
                return true;
            }
            let Term::Var(v) = &cur else {
                return false;
            };
            match self.bindings.get(v) {
                Some(next) => cur = next.clone(),
                None => return false,
            }
            steps += 1;
            if steps > self.bindings.size() + 1 {
                return false;
            }
        }
    }

    /// Provenance-preserving unification. `None` is failure.
    pub fn unify(&self, a: &Term, b: &Term) -> Option<Substitution> {
        let (x_var, x) = self.walk_binding(a);
        let (y_var, y) = self.walk_binding(b);
        if x.identical(&y) {
            if x.is_var() || x_var.identical(&y_var) {
                return Some(self.clone());
            }
            return Some(match (&x_var, &y_var) {
                (Term::Var(xv), _) => self.rebind_if_changed(xv, y_var.clone()),
                (_, Term::Var(yv)) => self.rebind_if_changed(yv, x_var.clone()),
                _ => self.clone(),
            });
        }
        if let Term::Var(xv) = &x {
            return Some(self.extend(xv, y_var));
        }
        if let Term::Var(yv) = &y {
            return Some(self.extend(yv, x_var));
        }
        let (Term::Compound(xc), Term::Compound(yc)) = (&x, &y) else {
            return None;
        };
        let mut s = self.unify_common_keys(xc, yc)?;
        // Both sides were bound variables: link them too, so that the two
        // variables (not just their parts) share a common descendant.
        if let (Term::Var(_), Term::Var(_)) = (&x_var, &y_var) {
            let (xv, _) = s.walk_binding(&x_var);
            let (yv, _) = s.walk_binding(&y_var);
            if let (Term::Var(xv), false) = (&xv, xv.identical(&yv)) {
                s = s.rebind(xv, yv);
            }
        }
        Some(s)
    }

    fn unify_common_keys(&self, x: &Compound, y: &Compound) -> Option<Substitution> {
        let mut s = self.clone();
        for (k, xt) in x.iter() {
            if let Some(yt) = y.get(k) {
                s = s.unify(xt, yt)?;
            }
        }
        Some(s)
    }

    fn rebind_if_changed(&self, v: &LVar, t: Term) -> Substitution {
        match self.get(v) {
            Some(cur) if cur.identical(&t) => self.clone(),
            Some(_) => self.rebind(v, t),
            None => self.extend(v, t),
        }
    }

    /// Replaces every reachable variable by its walked value. Free variables
    /// are an error.
    pub fn reify(&self, t: &Term) -> Result<Term, ReifyError> {
        self.reify_at(t, 0, false)
    }

    /// Like [`reify`](Self::reify) but leaves free variables in place.
    pub fn reify_partial(&self, t: &Term) -> Term {
        self.reify_at(t, 0, true).unwrap_or_else(|_| t.clone())
    }

    fn reify_at(&self, t: &Term, depth: usize, lenient: bool) -> Result<Term, ReifyError> {
        if depth > REIFY_DEPTH_LIMIT {
            return Err(ReifyError::TooDeep(REIFY_DEPTH_LIMIT));
        }
        match self.walk(t) {
            Term::Var(v) if lenient => Ok(Term::Var(v)),
            Term::Var(v) => Err(ReifyError::FreeVariable(v)),
            Term::Atom(a) => Ok(Term::Atom(a)),
            Term::Compound(c) => {
                if c.values().all(|v| !v.is_var() && v.is_ground() && !matches!(v, Term::Compound(_))) {
                    return Ok(Term::Compound(c));
                }
                let mut entries = alloc::collections::BTreeMap::new();
                for (k, v) in c.iter() {
                    entries.insert(k.clone(), self.reify_at(v, depth + 1, lenient)?);
                }
                Ok(Term::Compound(Compound::new(entries)))
            }
        }
    }
}
