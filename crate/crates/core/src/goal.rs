//! First-order goals and the standard relations.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{cons, LVar, Term};

/// Body of a `fresh`: receives the newly introduced variables.
pub type FreshBody = dyn Fn(&[LVar]) -> Goal + Send + Sync;

#[derive(Clone)]
pub struct Fresh {
    arity: usize,
    body: Arc<FreshBody>,
}

impl Fresh {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Introduces `arity` new variables and builds the body goal.
    pub fn expand(&self) -> Goal {
        let vars: Vec<LVar> = (0..self.arity).map(|_| LVar::fresh()).collect();
        (self.body)(&vars)
    }
}

#[derive(Clone)]
pub enum Goal {
    Succeed,
    Fail,
    Eq(Term, Term),
    /// Reactive unification: assign `rhs` (read now) to `lhs` at the next timestep.
    Set(LVar, Term),
    /// Succeeds iff the walked term is (or, negated, is not) a cons pair.
    PairCheck {
        term: Term,
        negated: bool,
    },
    Conj(Arc<[Goal]>),
    Conde(Arc<[Goal]>),
    Fresh(Fresh),
}

pub fn succeed() -> Goal {
    Goal::Succeed
}

pub fn fail() -> Goal {
    Goal::Fail
}

pub fn eq(a: impl Into<Term>, b: impl Into<Term>) -> Goal {
    Goal::Eq(a.into(), b.into())
}

pub fn set(lhs: &LVar, rhs: impl Into<Term>) -> Goal {
    Goal::Set(lhs.clone(), rhs.into())
}

pub fn is_pair(t: impl Into<Term>) -> Goal {
    Goal::PairCheck { term: t.into(), negated: false }
}

pub fn not_pair(t: impl Into<Term>) -> Goal {
    Goal::PairCheck { term: t.into(), negated: true }
}

pub fn conj(goals: impl IntoIterator<Item = Goal>) -> Goal {
    Goal::Conj(goals.into_iter().collect())
}

pub fn conde(branches: impl IntoIterator<Item = Goal>) -> Goal {
    Goal::Conde(branches.into_iter().collect())
}

/// `fresh(|[a, b]| ...)` introduces `N` variables.
pub fn fresh<const N: usize>(body: impl Fn([LVar; N]) -> Goal + Send + Sync + 'static) -> Goal {
    Goal::Fresh(Fresh {
        arity: N,
        body: Arc::new(move |vars: &[LVar]| {
            let arr: [LVar; N] = core::array::from_fn(|i| vars[i].clone());
            body(arr)
        }),
    })
}

impl From<Vec<Goal>> for Goal {
    fn from(goals: Vec<Goal>) -> Goal {
        conj(goals)
    }
}

impl Goal {
    /// Variables mentioned by the goal's first-order parts. `Fresh` bodies
    /// are opaque and contribute nothing.
    pub fn mentions(&self, out: &mut Vec<LVar>) {
        match self {
            Goal::Succeed | Goal::Fail | Goal::Fresh(_) => {}
            Goal::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Goal::Set(v, t) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
                t.collect_vars(out);
            }
            Goal::PairCheck { term, .. } => term.collect_vars(out),
            Goal::Conj(gs) | Goal::Conde(gs) => gs.iter().for_each(|g| g.mentions(out)),
        }
    }

    pub fn is_set(&self) -> bool {
        matches!(self, Goal::Set(..))
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Goal::Succeed => f.write_str("succeed"),
            Goal::Fail => f.write_str("fail"),
            Goal::Eq(a, b) => write!(f, "(== {} {})", a, b),
            Goal::Set(v, t) => write!(f, "(set {} {})", v, t),
            Goal::PairCheck { term, negated: false } => write!(f, "(pairo {})", term),
            Goal::PairCheck { term, negated: true } => write!(f, "(not (pairo {}))", term),
            Goal::Conj(gs) => {
                f.write_str("(conj")?;
                for g in gs.iter() {
                    write!(f, " {}", g)?;
                }
                f.write_str(")")
            }
            Goal::Conde(gs) => {
                f.write_str("(conde")?;
                for g in gs.iter() {
                    write!(f, " {}", g)?;
                }
                f.write_str(")")
            }
            Goal::Fresh(fr) => write!(f, "(fresh/{} ...)", fr.arity),
        }
    }
}

impl fmt::Debug for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Writes a conjunction of first-order goals the way the tree dump shows it.
pub fn display_conjunction(goals: &[Goal]) -> alloc::string::String {
    use alloc::string::ToString;
    match goals {
        [] => "succeed".to_string(),
        [g] => g.to_string(),
        gs => conj(gs.iter().cloned()).to_string(),
    }
}

/// Binds `x` to each element of the cons list `xs`, in list order.
pub fn membero(xs: impl Into<Term>, x: impl Into<Term>) -> Goal {
    let (xs, x) = (xs.into(), x.into());
    fresh(move |[head, tail]| {
        conj([eq(xs.clone(), cons(&head, &tail)), conde([eq(&head, x.clone()), membero(&tail, x.clone())])])
    })
}

/// Binds `t` to every suffix of `xs`: `xs` itself first, `nil` last.
pub fn tailo(xs: impl Into<Term>, t: impl Into<Term>) -> Goal {
    let (xs, t) = (xs.into(), t.into());
    conde([
        eq(xs.clone(), t.clone()),
        fresh(move |[head, tail]| conj([eq(xs.clone(), cons(&head, &tail)), tailo(&tail, t.clone())])),
    ])
}

/// Relates two numbers `n` and `n + 1` for `0 <= n < limit`, as a finite
/// table. The engine has no arithmetic.
pub fn succo(n: impl Into<Term>, m: impl Into<Term>, limit: u32) -> Goal {
    let (n, m) = (n.into(), m.into());
    conde((0..limit).map(|i| conj([eq(n.clone(), i as i64), eq(m.clone(), i as i64 + 1)])))
}
