//! Persistent first-order search tree.
//!
//! Growing a tree runs the search while recording, per node, the
//! conjunction of first-order goals met since the last `conde`. `fresh`
//! bodies are expanded exactly once, so a grown node holds only unifications
//! and pair checks and can be re-run against any later substitution. A
//! success leaf's position in the tree is its identity: it keeps its
//! attachment for as long as its path keeps succeeding.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::goal::{display_conjunction, Goal};
use crate::search::{run_conjunction, run_segment, Branch, Cont, SearchConfig, SearchError, Segment};
use crate::subst::Substitution;
use crate::term::{format_number, Atom, Handler, HandlerKind, LVar, Term};

/// Opaque handle of one success leaf. Never reused.
pub type Attachment = u64;

static NEXT_ATTACHMENT: AtomicU64 = AtomicU64::new(1);

fn next_attachment() -> Attachment {
    NEXT_ATTACHMENT.fetch_add(1, AtomicOrdering::Relaxed)
}

/// Sort key of an order value: numbers, then strings, then anything else.
#[derive(Clone, Debug)]
pub enum OrderKey {
    Num(f64),
    Str(Arc<str>),
    Other(String),
}

impl OrderKey {
    pub fn of(t: &Term) -> OrderKey {
        use alloc::string::ToString;
        match t {
            Term::Atom(Atom::Num(n)) => OrderKey::Num(*n),
            Term::Atom(Atom::Str(s)) => OrderKey::Str(s.clone()),
            other => OrderKey::Other(other.to_string()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            OrderKey::Num(_) => 0,
            OrderKey::Str(_) => 1,
            OrderKey::Other(_) => 2,
        }
    }
}

impl Ord for OrderKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (OrderKey::Num(a), OrderKey::Num(b)) => a.total_cmp(b),
            (OrderKey::Str(a), OrderKey::Str(b)) => a.cmp(b),
            (OrderKey::Other(a), OrderKey::Other(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for OrderKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for OrderKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OrderKey {}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum KeyPart {
    /// Leading part: the leaf's order value. Unordered leaves sort first.
    Order(Option<OrderKey>),
    /// Child index along the tree path.
    Index(u32),
}

/// Totally ordered sibling key: order value, then tree path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PositionKey(pub Vec<KeyPart>);

impl PositionKey {
    /// `key` placed under `prefix`, used for nested dynamic slots.
    pub fn nested(prefix: &PositionKey, key: &PositionKey) -> PositionKey {
        let mut parts = prefix.0.clone();
        parts.extend(key.0.iter().cloned());
        PositionKey(parts)
    }

    pub fn render(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                out.push('.');
            }
            match p {
                KeyPart::Index(n) => write!(out, "{}", n).unwrap(),
                KeyPart::Order(None) => out.push('_'),
                KeyPart::Order(Some(OrderKey::Num(n))) => write!(out, "#{}", format_number(*n)).unwrap(),
                KeyPart::Order(Some(OrderKey::Str(s))) => write!(out, "#{:?}", s).unwrap(),
                KeyPart::Order(Some(OrderKey::Other(s))) => write!(out, "#{}", s).unwrap(),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transition {
    Unmount {
        attachment: Attachment,
        key: PositionKey,
    },
    Mount {
        attachment: Attachment,
        key: PositionKey,
    },
    /// The leaf survived but the values it shows changed.
    Update {
        attachment: Attachment,
        key: PositionKey,
    },
}

#[derive(Clone, Debug)]
struct LeafState {
    attachment: Attachment,
    observed: (Term, Option<Term>),
}

#[derive(Clone)]
enum NodeKind {
    Branch(Vec<ViewNode>),
    Success(LeafState),
    Failure,
}

/// One node of the tree. `conj` is fixed once grown.
#[derive(Clone)]
pub struct ViewNode {
    conj: Vec<Goal>,
    // goals to run after `conj` when the node (re)grows
    pending: Cont,
    depth: usize,
    local: Option<Substitution>,
    kind: NodeKind,
}

#[derive(Clone, Copy)]
struct Watch<'a> {
    view: &'a LVar,
    order: Option<&'a LVar>,
    cfg: &'a SearchConfig,
}

impl Watch<'_> {
    fn observe(&self, s: &Substitution) -> (Term, Option<Term>) {
        (s.reify_partial(&Term::Var(self.view.clone())), self.order.map(|o| s.reify_partial(&Term::Var(o.clone()))))
    }
}

#[derive(Default)]
struct Changes {
    unmounted: Vec<Attachment>,
    mounted: BTreeSet<Attachment>,
    updated: BTreeSet<Attachment>,
}

impl ViewNode {
    fn grow(s: Substitution, conj: Vec<Goal>, pending: Cont, depth: usize, w: Watch<'_>) -> Result<ViewNode, SearchError> {
        let mut b = Branch { subst: s, cont: pending, depth, trace: Some(conj), sets: Vec::new() };
        let segment = run_segment(&mut b, w.cfg)?;
        let conj = b.trace.take().unwrap_or_default();
        Ok(match segment {
            Segment::Success => {
                let leaf = LeafState { attachment: next_attachment(), observed: w.observe(&b.subst) };
                ViewNode { conj, pending: Cont::default(), depth: b.depth, local: Some(b.subst), kind: NodeKind::Success(leaf) }
            }
            Segment::Failure => ViewNode { conj, pending: b.cont, depth: b.depth, local: None, kind: NodeKind::Failure },
            Segment::Branch(branches) => {
                let mut children = Vec::with_capacity(branches.len());
                for br in branches.iter() {
                    children.push(ViewNode::grow(b.subst.clone(), Vec::new(), b.cont.push(br.clone()), b.depth, w)?);
                }
                ViewNode {
                    conj,
                    pending: b.cont.push(Goal::Conde(branches)),
                    depth: b.depth,
                    local: Some(b.subst),
                    kind: NodeKind::Branch(children),
                }
            }
        })
    }

    fn reexpand(&mut self, s: &Substitution, w: Watch<'_>, changes: &mut Changes) -> Result<(), SearchError> {
        let ran = run_conjunction(s, &self.conj);
        match (&mut self.kind, ran) {
            (NodeKind::Failure, None) => {}
            (NodeKind::Failure, Some(s2)) => {
                let grown = ViewNode::grow(s2, self.conj.clone(), self.pending.clone(), self.depth, w)?;
                grown.for_each_leaf(&mut |leaf| {
                    changes.mounted.insert(leaf.attachment);
                });
                *self = grown;
            }
            (NodeKind::Success(leaf), None) => {
                changes.unmounted.push(leaf.attachment);
                self.kind = NodeKind::Failure;
                self.local = None;
            }
            (NodeKind::Success(leaf), Some(s2)) => {
                let observed = w.observe(&s2);
                if observed != leaf.observed {
                    changes.updated.insert(leaf.attachment);
                    leaf.observed = observed;
                }
                self.local = Some(s2);
            }
            (NodeKind::Branch(_), None) => {
                self.for_each_leaf(&mut |leaf| changes.unmounted.push(leaf.attachment));
                self.kind = NodeKind::Failure;
                self.local = None;
            }
            (NodeKind::Branch(children), Some(s2)) => {
                for c in children.iter_mut() {
                    c.reexpand(&s2, w, changes)?;
                }
                self.local = Some(s2);
            }
        }
        Ok(())
    }

    fn for_each_leaf(&self, f: &mut impl FnMut(&LeafState)) {
        match &self.kind {
            NodeKind::Success(leaf) => f(leaf),
            NodeKind::Failure => {}
            NodeKind::Branch(children) => children.iter().for_each(|c| c.for_each_leaf(f)),
        }
    }

    fn collect_leaves(&self, path: &mut Vec<u32>, context: &mut Vec<Goal>, out: &mut Vec<Leaf>) {
        let mark = context.len();
        context.extend(self.conj.iter().filter(|g| !g.is_set()).cloned());
        match &self.kind {
            NodeKind::Success(leaf) => out.push(Leaf {
                attachment: leaf.attachment,
                key: PositionKey(Vec::new()),
                path: path.clone(),
                substitution: self.local.clone().expect("success leaf without substitution"),
                view: leaf.observed.0.clone(),
                order_value: leaf.observed.1.clone(),
                context: context.clone(),
            }),
            NodeKind::Failure => {}
            NodeKind::Branch(children) => {
                for (i, c) in children.iter().enumerate() {
                    path.push(i as u32);
                    c.collect_leaves(path, context, out);
                    path.pop();
                }
            }
        }
        context.truncate(mark);
    }

    fn census(&self, c: &mut Census) {
        match &self.kind {
            NodeKind::Success(_) => c.successes += 1,
            NodeKind::Failure => c.failures += 1,
            NodeKind::Branch(children) => {
                c.branches += 1;
                children.iter().for_each(|ch| ch.census(c));
            }
        }
    }

    fn dump(&self, path: &mut Vec<u32>) -> DumpNode {
        let (kind, attachment, children) = match &self.kind {
            NodeKind::Success(leaf) => ("success", Some(leaf.attachment), Vec::new()),
            NodeKind::Failure => ("failure", None, Vec::new()),
            NodeKind::Branch(cs) => {
                let mut out = Vec::new();
                for (i, c) in cs.iter().enumerate() {
                    path.push(i as u32);
                    out.push(c.dump(path));
                    path.pop();
                }
                ("branch", None, out)
            }
        };
        DumpNode { kind, conjunction: display_conjunction(&self.conj), path: path.clone(), attachment, children }
    }
}

/// A success leaf as seen from outside the tree.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub attachment: Attachment,
    pub key: PositionKey,
    /// Child indices from the root.
    pub path: Vec<u32>,
    /// Substitution at the leaf.
    pub substitution: Substitution,
    /// View variable, reified leniently at the leaf.
    pub view: Term,
    pub order_value: Option<Term>,
    /// Conjunction of the stored goals on the path, `Set`s excluded.
    pub context: Vec<Goal>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub branches: usize,
    pub successes: usize,
    pub failures: usize,
}

/// Debug dump of one node.
#[derive(Clone, Debug)]
pub struct DumpNode {
    pub kind: &'static str,
    pub conjunction: String,
    pub path: Vec<u32>,
    pub attachment: Option<Attachment>,
    pub children: Vec<DumpNode>,
}

/// A grown tree together with the variables its leaves are read through.
#[derive(Clone)]
pub struct ViewTree {
    root: ViewNode,
    view_var: LVar,
    order_var: Option<LVar>,
    cfg: SearchConfig,
}

impl core::fmt::Debug for ViewTree {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ViewTree").field("census", &self.census()).finish()
    }
}

impl ViewTree {
    pub fn expand(s: &Substitution, goal: &Goal, view_var: LVar, order_var: Option<LVar>) -> Result<ViewTree, SearchError> {
        ViewTree::expand_with(s, goal, view_var, order_var, SearchConfig::default())
    }

    pub fn expand_with(
        s: &Substitution,
        goal: &Goal,
        view_var: LVar,
        order_var: Option<LVar>,
        cfg: SearchConfig,
    ) -> Result<ViewTree, SearchError> {
        let w = Watch { view: &view_var, order: order_var.as_ref(), cfg: &cfg };
        let root = ViewNode::grow(s.clone(), Vec::new(), Cont::default().push(goal.clone()), 0, w)?;
        Ok(ViewTree { root, view_var, order_var, cfg })
    }

    /// Mints the view (and order) variable, builds the goal from a view
    /// handler and grows the tree. `None` when `h` is not a view handler.
    pub fn from_handler(s: &Substitution, h: &Handler, cfg: SearchConfig) -> Option<Result<ViewTree, SearchError>> {
        let HandlerKind::View { arity, build } = h.kind() else {
            return None;
        };
        let view = LVar::named("view");
        let order = (*arity == 2).then(|| LVar::named("order"));
        let goal = build(view.clone(), order.clone());
        Some(ViewTree::expand_with(s, &goal, view, order, cfg))
    }

    pub fn view_var(&self) -> &LVar {
        &self.view_var
    }

    pub fn order_var(&self) -> Option<&LVar> {
        self.order_var.as_ref()
    }

    /// Re-runs every stored conjunction against `s`. Returns unmounts,
    /// then mounts, then updates, each in document order.
    pub fn reexpand(&mut self, s: &Substitution) -> Result<Vec<Transition>, SearchError> {
        let old: BTreeMap<Attachment, PositionKey> = self.ordered_answers().into_iter().map(|l| (l.attachment, l.key)).collect();
        let mut changes = Changes::default();
        let w = Watch { view: &self.view_var, order: self.order_var.as_ref(), cfg: &self.cfg };
        self.root.reexpand(s, w, &mut changes)?;
        let mut unmounts: Vec<(PositionKey, Attachment)> = changes.unmounted.iter().map(|a| (old[a].clone(), *a)).collect();
        unmounts.sort();
        let mut out: Vec<Transition> =
            unmounts.into_iter().map(|(key, attachment)| Transition::Unmount { attachment, key }).collect();
        let leaves = self.ordered_answers();
        for l in &leaves {
            if changes.mounted.contains(&l.attachment) {
                out.push(Transition::Mount { attachment: l.attachment, key: l.key.clone() });
            }
        }
        for l in &leaves {
            if changes.updated.contains(&l.attachment) {
                out.push(Transition::Update { attachment: l.attachment, key: l.key.clone() });
            }
        }
        Ok(out)
    }

    /// Success leaves in depth-first order, with unordered keys.
    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut Vec::new(), &mut Vec::new(), &mut out);
        for l in out.iter_mut() {
            l.key = PositionKey(l.path.iter().map(|i| KeyPart::Index(*i)).collect());
        }
        out
    }

    /// Success leaves sorted by order value (ascending, stable by tree
    /// position), each with its position key.
    pub fn ordered_answers(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut Vec::new(), &mut Vec::new(), &mut out);
        let mut kinds = BTreeSet::new();
        for l in out.iter_mut() {
            let order = l.order_value.as_ref().filter(|t| !t.is_var()).map(OrderKey::of);
            if let Some(o) = &order {
                kinds.insert(o.rank());
            }
            let mut parts = alloc::vec![KeyPart::Order(order)];
            parts.extend(l.path.iter().map(|i| KeyPart::Index(*i)));
            l.key = PositionKey(parts);
        }
        if kinds.len() > 1 {
            log::warn!("order values mix numbers, strings or other terms; numbers are placed first");
        }
        out.sort_by(|a, b| a.key.cmp(&b.key));
        out
    }

    pub fn census(&self) -> Census {
        let mut c = Census::default();
        self.root.census(&mut c);
        c
    }

    pub fn dump(&self) -> DumpNode {
        self.root.dump(&mut Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goal::*;
    use crate::insertion::imembero;
    use crate::reactive::ReactiveSystem;
    use crate::term::{cons, list};

    fn values(t: &ViewTree) -> Vec<Term> {
        t.ordered_answers().into_iter().map(|l| l.view).collect()
    }

    #[test]
    fn membero_tree_shape() {
        let sys = ReactiveSystem::new(&list(["ipsum", "dolor"])).unwrap();
        let v = LVar::named("view");
        let t = ViewTree::expand(&sys.substitution, &membero(sys.model_var(), &v), v, None).unwrap();
        assert_eq!(t.census(), Census { branches: 2, successes: 2, failures: 1 });
        assert_eq!(values(&t), alloc::vec![Term::from("ipsum"), Term::from("dolor")]);
    }

    #[test]
    fn imembero_tree_shape() {
        let sys = ReactiveSystem::new(&cons("ipsum", "dolor")).unwrap();
        let v = LVar::named("view");
        let t = ViewTree::expand(&sys.substitution, &imembero(sys.model_var(), &v), v, None).unwrap();
        assert_eq!(t.census(), Census { branches: 4, successes: 2, failures: 3 });
        let d = t.dump();
        assert_eq!(d.children.len(), 2);
        assert_eq!(d.children[0].kind, "failure");
        assert_eq!(d.children[1].children.len(), 2);
    }

    #[test]
    fn failing_goal_is_one_failure_leaf() {
        let v = LVar::named("view");
        let t = ViewTree::expand(&Substitution::new(), &fail(), v, None).unwrap();
        assert_eq!(t.census(), Census { branches: 0, successes: 0, failures: 1 });
    }

    #[test]
    fn order_variable_overrides_search_order() {
        let (v, o) = (LVar::named("view"), LVar::named("order"));
        let g = conde([conj([eq(&v, "ipsum"), eq(&o, 2)]), conj([eq(&v, "lorem"), eq(&o, 1)])]);
        let t = ViewTree::expand(&Substitution::new(), &g, v, Some(o)).unwrap();
        assert_eq!(values(&t), alloc::vec![Term::from("lorem"), Term::from("ipsum")]);
        assert_eq!(t.leaves()[0].view, Term::from("ipsum"));
    }

    #[test]
    fn mixed_order_values_put_numbers_first() {
        let (v, o) = (LVar::named("view"), LVar::named("order"));
        let g = conde([conj([eq(&v, "s"), eq(&o, "a")]), conj([eq(&v, "n"), eq(&o, 10)])]);
        let t = ViewTree::expand(&Substitution::new(), &g, v, Some(o)).unwrap();
        assert_eq!(values(&t), alloc::vec![Term::from("n"), Term::from("s")]);
    }

    #[test]
    fn hiding_and_showing_keeps_positions() {
        let item = |t: &str| Term::record([("text", Term::from(t)), ("show", Term::from(true))]);
        let sys = ReactiveSystem::new(&list([item("ipsum"), item("dolor")])).unwrap();
        let m = sys.model_var();
        let v = LVar::named("view");
        let goal = {
            let v = v.clone();
            fresh(move |[x]| {
                conj([membero(m.clone(), &x), eq(&x, Term::record([("text", Term::Var(v.clone())), ("show", Term::from(true))]))])
            })
        };
        let mut t = ViewTree::expand(&sys.substitution, &goal, v, None).unwrap();
        let before = t.ordered_answers();
        let show = {
            let s = &sys.substitution;
            let head = s.walk(&sys.model_var()).as_pair().unwrap().0.as_var().unwrap().clone();
            s.walk(&Term::Var(head)).as_compound().unwrap().get_name("show").unwrap().as_var().unwrap().clone()
        };
        let hidden = sys.step(&set(&show, false), &[]).unwrap();
        let tr = t.reexpand(&hidden.substitution).unwrap();
        assert_eq!(tr, alloc::vec![Transition::Unmount { attachment: before[0].attachment, key: before[0].key.clone() }]);
        assert_eq!(t.ordered_answers()[0].attachment, before[1].attachment);
        let shown = hidden.step(&set(&show, true), &[]).unwrap();
        let tr = t.reexpand(&shown.substitution).unwrap();
        assert!(matches!(&tr[..], [Transition::Mount { key, .. }] if *key == before[0].key));
        assert_eq!(values(&t), alloc::vec![Term::from("ipsum"), Term::from("dolor")]);
    }

    #[test]
    fn head_insert_rewrites_membero_but_not_imembero() {
        let sys = ReactiveSystem::new(&list(["ipsum", "dolor"])).unwrap();
        let v = LVar::named("view");
        let mut t = ViewTree::expand(&sys.substitution, &membero(sys.model_var(), &v), v, None).unwrap();
        let model = sys.model().unwrap();
        let next = sys.step(&set(&sys.model_root, cons("lorem", model)), &[]).unwrap();
        let tr = t.reexpand(&next.substitution).unwrap();
        let updates = tr.iter().filter(|x| matches!(x, Transition::Update { .. })).count();
        let mounts = tr.iter().filter(|x| matches!(x, Transition::Mount { .. })).count();
        assert_eq!((updates, mounts), (2, 1));
        assert_eq!(values(&t), alloc::vec![Term::from("lorem"), Term::from("ipsum"), Term::from("dolor")]);

        let sys = ReactiveSystem::new(&cons("ipsum", "dolor")).unwrap();
        let v = LVar::named("view");
        let mut t = ViewTree::expand(&sys.substitution, &imembero(sys.model_var(), &v), v, None).unwrap();
        let leaf = crate::insertion::leftmost_leaf(&sys.substitution, &sys.model_root).unwrap();
        let g = crate::insertion::insert_before(&sys.substitution, &leaf, &Term::from("lorem")).unwrap();
        let next = sys.step(&g, &[]).unwrap();
        let tr = t.reexpand(&next.substitution).unwrap();
        assert_eq!(tr.len(), 3);
        assert!(matches!(tr[0], Transition::Unmount { .. }));
        assert!(tr[1..].iter().all(|x| matches!(x, Transition::Mount { .. })));
        assert_eq!(values(&t), alloc::vec![Term::from("lorem"), Term::from("ipsum"), Term::from("dolor")]);
    }

    #[test]
    fn leaf_context_excludes_sets() {
        let v = LVar::named("view");
        let g = conj([eq(&v, 1), set(&v, 2)]);
        let t = ViewTree::expand(&Substitution::new(), &g, v, None).unwrap();
        let leaves = t.leaves();
        assert_eq!(leaves.len(), 1);
        assert_eq!(leaves[0].context.len(), 1);
    }
}
