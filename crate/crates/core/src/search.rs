//! Exhaustive depth-first search.
//!
//! Goals run under `run*` semantics: every answer is produced, in strict
//! depth-first left-to-right order. `Set` goals never touch the
//! substitution during search; they are collected into the answer.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::goal::Goal;
use crate::subst::Substitution;
use crate::term::{LVar, Term};

pub const DEFAULT_MAX_DEPTH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search exceeded the maximum depth of {0} nested expansions")]
    DepthExceeded(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of `fresh` expansions along one branch.
    pub max_depth: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Debug, Clone)]
pub struct Answer {
    pub substitution: Substitution,
    /// `Set` goals met on this branch, as (lhs, rhs).
    pub sets: Vec<(LVar, Term)>,
    pub order_value: Option<Term>,
}

/// Persistent stack of goals still to run on the current branch.
#[derive(Clone, Default)]
pub(crate) struct Cont(Option<Arc<ContCell>>);

struct ContCell {
    head: Goal,
    tail: Cont,
}

impl Cont {
    pub(crate) fn push(&self, head: Goal) -> Cont {
        Cont(Some(Arc::new(ContCell { head, tail: self.clone() })))
    }

    fn pop(&mut self) -> Option<Goal> {
        let cell = self.0.take()?;
        let head = cell.head.clone();
        *self = cell.tail.clone();
        Some(head)
    }
}

/// How a run of sequential goals ended.
pub(crate) enum Segment {
    Success,
    Failure,
    Branch(Arc<[Goal]>),
}

/// Mutable state of one branch while it runs sequentially.
pub(crate) struct Branch {
    pub subst: Substitution,
    pub cont: Cont,
    pub depth: usize,
    /// Conjunction of first-order goals run so far; `None` when not tracing.
    pub trace: Option<Vec<Goal>>,
    pub sets: Vec<(LVar, Term)>,
}

pub(crate) fn pair_check(s: &Substitution, term: &Term, negated: bool) -> bool {
    s.walk(term).is_pair() != negated
}

/// Runs goals until the branch succeeds, fails, or reaches a `conde`.
/// On `Branch`, `b.cont` holds the goals after the `conde`.
pub(crate) fn run_segment(b: &mut Branch, cfg: &SearchConfig) -> Result<Segment, SearchError> {
    while let Some(goal) = b.cont.pop() {
        match goal {
            Goal::Succeed => {}
            Goal::Fail => {
                record(b, Goal::Fail);
                return Ok(Segment::Failure);
            }
            Goal::Eq(ref x, ref y) => {
                let next = b.subst.unify(x, y);
                record(b, goal.clone());
                match next {
                    Some(s) => b.subst = s,
                    None => return Ok(Segment::Failure),
                }
            }
            Goal::PairCheck { ref term, negated } => {
                let ok = pair_check(&b.subst, term, negated);
                record(b, goal.clone());
                if !ok {
                    return Ok(Segment::Failure);
                }
            }
            Goal::Set(ref lhs, ref rhs) => {
                b.sets.push((lhs.clone(), rhs.clone()));
                record(b, goal.clone());
            }
            Goal::Conj(gs) => {
                for g in gs.iter().rev() {
                    b.cont = b.cont.push(g.clone());
                }
            }
            Goal::Conde(branches) => {
                if branches.is_empty() {
                    record(b, Goal::Fail);
                    return Ok(Segment::Failure);
                }
                return Ok(Segment::Branch(branches));
            }
            Goal::Fresh(fr) => {
                b.depth += 1;
                if b.depth > cfg.max_depth {
                    return Err(SearchError::DepthExceeded(cfg.max_depth));
                }
                b.cont = b.cont.push(fr.expand());
            }
        }
    }
    Ok(Segment::Success)
}

fn record(b: &mut Branch, g: Goal) {
    if let Some(t) = b.trace.as_mut() {
        t.push(g);
    }
}

/// All answers of `g` on `s`, in depth-first order.
pub fn run_all(s: &Substitution, g: &Goal) -> Result<Vec<Answer>, SearchError> {
    run_all_with(s, g, &SearchConfig::default())
}

pub fn run_all_with(s: &Substitution, g: &Goal, cfg: &SearchConfig) -> Result<Vec<Answer>, SearchError> {
    let mut answers = Vec::new();
    let mut stack =
        alloc::vec![Branch { subst: s.clone(), cont: Cont::default().push(g.clone()), depth: 0, trace: None, sets: Vec::new() }];
    while let Some(mut b) = stack.pop() {
        match run_segment(&mut b, cfg)? {
            Segment::Success => answers.push(Answer { substitution: b.subst, sets: b.sets, order_value: None }),
            Segment::Failure => {}
            Segment::Branch(branches) => {
                for br in branches.iter().rev() {
                    stack.push(Branch {
                        subst: b.subst.clone(),
                        cont: b.cont.push(br.clone()),
                        depth: b.depth,
                        trace: None,
                        sets: b.sets.clone(),
                    });
                }
            }
        }
    }
    Ok(answers)
}

/// Runs a closure-free conjunction (as stored in a view-tree node).
pub(crate) fn run_conjunction(s: &Substitution, goals: &[Goal]) -> Option<Substitution> {
    let mut s = s.clone();
    for g in goals {
        match g {
            Goal::Succeed | Goal::Set(..) => {}
            Goal::Fail => return None,
            Goal::Eq(a, b) => s = s.unify(a, b)?,
            Goal::PairCheck { term, negated } => {
                if !pair_check(&s, term, *negated) {
                    return None;
                }
            }
            other => unreachable!("stored conjunction holds non-first-order goal {}", other),
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goal::*;
    use crate::term::{cons, list};

    fn reified(answers: &[Answer], v: &LVar) -> Vec<Term> {
        answers.iter().map(|a| a.substitution.reify(&v.into()).unwrap()).collect()
    }

    #[test]
    fn conde_answers_in_order() {
        let (x, y) = (LVar::named("x"), LVar::named("y"));
        let g = conj([eq(&x, &y), conde([eq(&y, 1), eq(&y, cons(1, 2))])]);
        let ans = run_all(&Substitution::new(), &g).unwrap();
        assert_eq!(reified(&ans, &y), alloc::vec![Term::from(1), cons(1, 2)]);
        assert_eq!(reified(&ans, &x), alloc::vec![Term::from(1), cons(1, 2)]);
    }

    #[test]
    fn fail_has_no_answers() {
        assert!(run_all(&Substitution::new(), &fail()).unwrap().is_empty());
        assert!(run_all(&Substitution::new(), &conde([])).unwrap().is_empty());
    }

    #[test]
    fn membero_in_list_order() {
        let (m, v) = (LVar::named("m"), LVar::named("v"));
        let s = Substitution::new().extend(&m, list(["ipsum", "dolor"]));
        let ans = run_all(&s, &membero(&m, &v)).unwrap();
        assert_eq!(reified(&ans, &v), alloc::vec![Term::from("ipsum"), Term::from("dolor")]);
        let three = run_all(&Substitution::new(), &membero(list(["a", "b", "c"]), &v)).unwrap();
        assert_eq!(reified(&three, &v), alloc::vec![Term::from("a"), Term::from("b"), Term::from("c")]);
        assert!(run_all(&Substitution::new(), &membero(Term::nil(), &v)).unwrap().is_empty());
    }

    #[test]
    fn tailo_enumerates_suffixes() {
        let t = LVar::named("t");
        let ans = run_all(&Substitution::new(), &tailo(list(["a", "b"]), &t)).unwrap();
        assert_eq!(reified(&ans, &t), alloc::vec![list(["a", "b"]), list(["b"]), Term::nil()]);
        let ans = run_all(&Substitution::new(), &tailo(Term::nil(), &t)).unwrap();
        assert_eq!(reified(&ans, &t), alloc::vec![Term::nil()]);
    }

    #[test]
    fn tailo_filtered_by_head() {
        let (t, cdr) = (LVar::named("t"), LVar::named("cdr"));
        let model = list(["a", "lorem", "b", "lorem"]);
        let g = conj([eq(&t, cons("lorem", &cdr)), tailo(model, &t)]);
        let ans = run_all(&Substitution::new(), &g).unwrap();
        assert_eq!(reified(&ans, &t), alloc::vec![list(["lorem", "b", "lorem"]), list(["lorem"])]);
    }

    #[test]
    fn sets_are_collected_not_applied() {
        let x = LVar::named("x");
        let s = Substitution::new().extend(&x, 1);
        let ans = run_all(&s, &conj([set(&x, 2), eq(&x, 1)])).unwrap();
        assert_eq!(ans.len(), 1);
        assert_eq!(ans[0].sets, alloc::vec![(x.clone(), Term::from(2))]);
        assert_eq!(ans[0].substitution.reify(&(&x).into()).unwrap(), Term::from(1));
    }

    #[test]
    fn runaway_recursion_is_reported() {
        fn forever(x: Term) -> Goal {
            fresh(move |[y]| conj([eq(x.clone(), cons(1, &y)), forever((&y).into())]))
        }
        let cfg = SearchConfig { max_depth: 50 };
        let err = run_all_with(&Substitution::new(), &forever(LVar::fresh().into()), &cfg).unwrap_err();
        assert_eq!(err, SearchError::DepthExceeded(50));
    }

    #[test]
    fn pair_check_both_polarities() {
        let ans = run_all(&Substitution::new(), &is_pair(cons(1, 2))).unwrap();
        assert_eq!(ans.len(), 1);
        assert!(run_all(&Substitution::new(), &not_pair(cons(1, 2))).unwrap().is_empty());
        assert_eq!(run_all(&Substitution::new(), &not_pair(Term::from("a"))).unwrap().len(), 1);
    }
}
