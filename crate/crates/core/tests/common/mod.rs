#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use rekanren_core::term::{cons, list, Compound, Key, LVar, Term};
use rekanren_core::Substitution;

pub fn arb_atom() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..4i32).prop_map(Term::from),
        prop::sample::select(vec!["a", "b", "lorem"]).prop_map(Term::from),
        any::<bool>().prop_map(Term::from),
        Just(Term::nil()),
    ]
}

/// Ground terms: atoms, small records and short cons lists.
pub fn arb_ground() -> impl Strategy<Value = Term> {
    arb_atom().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::btree_map(prop::sample::select(vec!["a", "b", "c"]), inner.clone(), 1..=3).prop_map(Term::record),
            prop::collection::vec(inner, 0..4).prop_map(list),
        ]
    })
}

pub fn arb_flat_list(max: usize) -> impl Strategy<Value = Vec<Term>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "lorem"]).prop_map(Term::from), 0..=max)
}

/// All variables reachable from `root`, with their parent (None for root).
pub fn tree_vars(s: &Substitution, root: &LVar) -> Vec<(LVar, Option<LVar>)> {
    let mut out = vec![];
    let mut stack = vec![(root.clone(), None)];
    while let Some((v, parent)) = stack.pop() {
        if let Some(Term::Compound(c)) = s.get(&v) {
            for child in c.values().collect::<Vec<_>>().into_iter().rev() {
                if let Term::Var(cv) = child {
                    stack.push((cv.clone(), Some(v.clone())));
                }
            }
        }
        out.push((v, parent));
    }
    out
}

/// `true` when `a` is `b` or an ancestor of `b` in the state tree.
pub fn is_ancestor_or_self(s: &Substitution, a: &LVar, b: &LVar) -> bool {
    let parents: BTreeMap<LVar, LVar> = s
        .bindings()
        .flat_map(|(v, t)| {
            let v = v.clone();
            t.as_compound()
                .into_iter()
                .flat_map(|c| c.values().filter_map(|x| x.as_var().cloned()).collect::<Vec<_>>())
                .map(move |c| (c, v.clone()))
        })
        .collect();
    let mut cur = Some(b.clone());
    while let Some(c) = cur {
        if &c == a {
            return true;
        }
        cur = parents.get(&c).cloned();
    }
    false
}

pub fn unrelated(s: &Substitution, a: &LVar, b: &LVar) -> bool {
    !is_ancestor_or_self(s, a, b) && !is_ancestor_or_self(s, b, a)
}

/// Textbook triangular unification with an occurs check and the same
/// common-key rule for compounds. Used as an independent oracle.
#[derive(Clone, Default)]
pub struct Oracle {
    pub map: BTreeMap<LVar, Term>,
}

#[derive(Debug, PartialEq)]
pub enum OracleFailure {
    Clash,
    Occurs,
}

impl Oracle {
    pub fn walk(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Term::Var(v) = &cur {
            match self.map.get(v) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    fn occurs(&self, v: &LVar, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => &w == v,
            Term::Atom(_) => false,
            Term::Compound(c) => c.values().any(|x| self.occurs(v, x)),
        }
    }

    pub fn unify(&mut self, a: &Term, b: &Term) -> Result<(), OracleFailure> {
        let (a, b) = (self.walk(a), self.walk(b));
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => Ok(()),
            (Term::Var(x), _) => {
                if self.occurs(x, &b) {
                    return Err(OracleFailure::Occurs);
                }
                self.map.insert(x.clone(), b.clone());
                Ok(())
            }
            (_, Term::Var(y)) => {
                if self.occurs(y, &a) {
                    return Err(OracleFailure::Occurs);
                }
                self.map.insert(y.clone(), a.clone());
                Ok(())
            }
            (Term::Atom(x), Term::Atom(y)) => {
                if x == y {
                    Ok(())
                } else {
                    Err(OracleFailure::Clash)
                }
            }
            (Term::Compound(x), Term::Compound(y)) => {
                for (k, xv) in x.iter() {
                    if let Some(yv) = y.get(k) {
                        self.unify(xv, yv)?;
                    }
                }
                Ok(())
            }
            _ => Err(OracleFailure::Clash),
        }
    }

    pub fn reify(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(c) => Term::Compound(Compound::new(c.iter().map(|(k, v)| (k.clone(), self.reify(v))).collect())),
            other => other,
        }
    }
}

/// Structural equality up to a consistent one-to-one renaming of variables.
pub fn alpha_eq(a: &Term, b: &Term, ren: &mut BTreeMap<LVar, LVar>, back: &mut BTreeMap<LVar, LVar>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match (ren.get(x), back.get(y)) {
            (Some(rx), Some(by)) => rx == y && by == x,
            (None, None) => {
                ren.insert(x.clone(), y.clone());
                back.insert(y.clone(), x.clone());
                true
            }
            _ => false,
        },
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Compound(x), Term::Compound(y)) => {
            x.len() == y.len() && x.iter().all(|(k, xv)| y.get(k).is_some_and(|yv| alpha_eq(xv, yv, ren, back)))
        }
        _ => false,
    }
}

/// Terms over a pool of variables, for unification tests.
pub fn arb_open_term(pool: Vec<LVar>) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        2 => arb_atom(),
        3 => prop::sample::select(pool).prop_map(Term::Var),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, d)| cons(a, d)),
            prop::collection::btree_map(prop::sample::select(vec!["a", "b"]), inner, 1..=2)
                .prop_map(|m| Term::Compound(Compound::new(m.into_iter().map(|(k, v)| (Key::name(k), v)).collect()))),
        ]
    })
    .boxed()
}
