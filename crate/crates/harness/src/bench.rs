//! Head insertion cost under `membero` and `imembero`.

use rekanren_core::dom::DomTree;
use rekanren_core::goal::set;
use rekanren_core::insertion::{from_flat, insert_before, leftmost_leaf};
use rekanren_core::term::{cons, list, LVar, Term};
use rekanren_core::{imembero, membero, mount, ReactiveSystem, Transition, ViewTree};
use serde::Serialize;

use crate::registry;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub mounts: usize,
    pub unmounts: usize,
    pub updates: usize,
    /// Render ops for the same step in the list template.
    pub ops: usize,
}

impl Counts {
    /// Attachments created, destroyed or re-bound.
    pub fn touched(&self) -> usize {
        self.mounts + self.unmounts + self.updates
    }

    fn of(tr: &[Transition], ops: usize) -> Counts {
        let mut c = Counts { ops, ..Counts::default() };
        for t in tr {
            match t {
                Transition::Mount { .. } => c.mounts += 1,
                Transition::Unmount { .. } => c.unmounts += 1,
                Transition::Update { .. } => c.updates += 1,
            }
        }
        c
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub membero: Counts,
    pub imembero: Counts,
}

fn items(n: usize) -> Vec<Term> {
    (0..n).map(|i| Term::from(format!("item{}", i))).collect()
}

/// Transitions and render ops for one step, measured on a bare view tree
/// and on the registered list template.
fn measure(sys: &ReactiveSystem, next: &ReactiveSystem, goal: fn(Term, &LVar) -> rekanren_core::Goal, template: &str) -> Counts {
    let v = LVar::named("view");
    let mut tree = ViewTree::expand(&sys.substitution, &goal(sys.model_var(), &v), v, None).expect("expand");
    let tr = tree.reexpand(&next.substitution).expect("reexpand");
    let tpl = (registry::lookup(template).unwrap().template)(&sys.model_root);
    let (mut inst, ops) = mount(sys, &tpl).expect("mount");
    let mut dom = DomTree::new();
    dom.apply_all(&ops).expect("ops apply");
    let ops = inst.refresh(&next.substitution).expect("refresh");
    dom.apply_all(&ops).expect("ops apply");
    Counts::of(&tr, ops.len())
}

fn membero_goal(m: Term, v: &LVar) -> rekanren_core::Goal {
    membero(m, v)
}

fn imembero_goal(m: Term, v: &LVar) -> rekanren_core::Goal {
    imembero(m, v)
}

pub fn head_insert(n: usize) -> BenchRow {
    let xs = items(n);
    let new = Term::from("new");

    let sys = ReactiveSystem::new(&list(xs.clone())).unwrap();
    let next = sys.step(&set(&sys.model_root, cons(new.clone(), sys.model().unwrap())), &[]).unwrap();
    let m = measure(&sys, &next, membero_goal, "membero-list");

    let sys = ReactiveSystem::new(&from_flat(&xs)).unwrap();
    let leaf = leftmost_leaf(&sys.substitution, &sys.model_root).expect("non-empty list");
    let next = sys.step(&insert_before(&sys.substitution, &leaf, &new).unwrap(), &[]).unwrap();
    let i = measure(&sys, &next, imembero_goal, "imembero-list");

    BenchRow { n, membero: m, imembero: i }
}

pub fn to_text(rows: &[BenchRow]) -> String {
    let mut out = String::from("head insertion      mount unmount update   ops\n");
    for r in rows {
        for (name, c) in [("membero", r.membero), ("imembero", r.imembero)] {
            out.push_str(&format!(
                "  n={:<5} {:<9} {:>5} {:>7} {:>6} {:>5}\n",
                r.n, name, c.mounts, c.unmounts, c.updates, c.ops
            ));
        }
    }
    out
}
