//! Insertion lists: lists stored as binary trees of cons pairs, read by
//! in-order traversal. Inserting replaces one leaf with a pair, so a view
//! built with [`imembero`] only grows below that leaf.
//!
//! Elements must not themselves be pairs. The empty list is `nil`; note
//! that `imembero` treats a bare `nil` as a one-element list holding `nil`,
//! exactly as its definition reads.

use alloc::vec::Vec;

use crate::goal::{conde, conj, eq, fresh, not_pair, Goal};
use crate::reactive::UpdateError;
use crate::subst::Substitution;
use crate::term::{cons, LVar, Term};

/// Binds `x` to every leaf of the insertion list `xs`, left to right.
pub fn imembero(xs: impl Into<Term>, x: impl Into<Term>) -> Goal {
    let (xs, x) = (xs.into(), x.into());
    let (xs2, x2) = (xs.clone(), x.clone());
    conde([
        conj([not_pair(xs.clone()), eq(xs, x)]),
        fresh(move |[a, b]| conj([eq(xs2.clone(), cons(&a, &b)), conde([imembero(&a, x2.clone()), imembero(&b, x2.clone())])])),
    ])
}

/// Update that puts `element` immediately before the leaf held by `leaf`.
pub fn insert_before(s: &Substitution, leaf: &LVar, element: &Term) -> Result<Goal, UpdateError> {
    let current = s.walk(&Term::Var(leaf.clone()));
    if current.is_pair() {
        return Err(UpdateError::Precondition(alloc::format!("{} holds a pair, not an insertion-list leaf", leaf)));
    }
    if element.is_pair() {
        return Err(UpdateError::Precondition(alloc::format!("insertion-list elements cannot be pairs: {}", element)));
    }
    Ok(Goal::Set(leaf.clone(), cons(element.clone(), Term::Var(leaf.clone()))))
}

/// Update that puts `element` immediately after the leaf held by `leaf`.
pub fn insert_after(s: &Substitution, leaf: &LVar, element: &Term) -> Result<Goal, UpdateError> {
    insert_before(s, leaf, element)?;
    Ok(Goal::Set(leaf.clone(), cons(Term::Var(leaf.clone()), element.clone())))
}

/// Balanced tree whose in-order traversal is `xs`.
pub fn from_flat(xs: &[Term]) -> Term {
    match xs {
        [] => Term::nil(),
        [x] => x.clone(),
        _ => {
            let mid = xs.len().div_ceil(2);
            cons(from_flat(&xs[..mid]), from_flat(&xs[mid..]))
        }
    }
}

/// In-order traversal of a ground insertion list. `nil` is empty.
pub fn flatten(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    if !t.is_nil() {
        flatten_into(t, &mut out);
    }
    out
}

fn flatten_into(t: &Term, out: &mut Vec<Term>) {
    let mut stack = alloc::vec![t];
    while let Some(t) = stack.pop() {
        match t.as_pair() {
            Some((a, b)) => {
                stack.push(b);
                stack.push(a);
            }
            None => out.push(t.clone()),
        }
    }
}

/// Variables holding the leaves of a normalized insertion list, in order.
pub fn leaf_vars(s: &Substitution, root: &LVar) -> Vec<LVar> {
    let mut out = Vec::new();
    if s.walk(&Term::Var(root.clone())).is_nil() {
        return out;
    }
    let mut stack = alloc::vec![root.clone()];
    while let Some(v) = stack.pop() {
        let (owner, value) = s.walk_binding(&Term::Var(v));
        match value.as_pair() {
            Some((a, b)) => {
                for side in [b, a] {
                    if let Term::Var(sv) = side {
                        stack.push(sv.clone());
                    }
                }
            }
            None => {
                if let Term::Var(ov) = owner {
                    out.push(ov);
                }
            }
        }
    }
    out
}

pub fn leftmost_leaf(s: &Substitution, root: &LVar) -> Option<LVar> {
    leaf_vars(s, root).into_iter().next()
}
