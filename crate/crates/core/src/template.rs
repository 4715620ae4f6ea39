//! Templates, mounting, refresh and event dispatch.
//!
//! A template is an ordinary [`Term`], so it can be bound to a view
//! variable:
//!
//! * a string, number or boolean renders as a text node; `nil` renders nothing;
//! * a compound with integer keys `0..n` is an element: key `0` holds the
//!   properties (a compound with `tagName`, or just the tag string) and
//!   keys `1..` the children;
//! * a view handler atom is a goal slot: each answer of its goal renders the
//!   template bound to the view variable, as siblings in answer order;
//! * a variable renders the template it is bound to.
//!
//! Property values are atoms, variables (reified at render time) or, for
//! names starting with `on`, event handlers.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::goal::{eq, Goal};
use crate::reactive::{ReactiveSystem, UpdateError};
use crate::search::{SearchConfig, SearchError};
use crate::subst::Substitution;
use crate::term::{format_number, list, Atom, Compound, Handler, HandlerKind, Key, LVar, Term};
use crate::view_tree::{Attachment, KeyPart, Leaf, PositionKey, ViewTree};

pub type NodeId = u64;

/// Event fields handlers may read.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventPayload {
    pub event_type: String,
    pub key: Option<String>,
    pub target_value: Option<String>,
    pub checked: Option<bool>,
}

impl EventPayload {
    pub fn new(event_type: &str) -> EventPayload {
        EventPayload { event_type: event_type.to_string(), ..Default::default() }
    }

    pub fn with_key(mut self, key: &str) -> EventPayload {
        self.key = Some(key.to_string());
        self
    }

    pub fn with_value(mut self, value: &str) -> EventPayload {
        self.target_value = Some(value.to_string());
        self
    }

    pub fn with_checked(mut self, checked: bool) -> EventPayload {
        self.checked = Some(checked);
        self
    }

    pub fn is_key(&self, key: &str) -> bool {
        self.key.as_deref() == Some(key)
    }

    pub fn to_term(&self) -> Term {
        let mut entries: Vec<(&str, Term)> = alloc::vec![("type", Term::from(self.event_type.as_str()))];
        if let Some(k) = &self.key {
            entries.push(("key", Term::from(k.as_str())));
        }
        if let Some(v) = &self.target_value {
            entries.push(("value", Term::from(v.as_str())));
        }
        if let Some(c) = self.checked {
            entries.push(("checked", Term::from(c)));
        }
        Term::record(entries)
    }
}

/// Side effects on live display state that the engine does not model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HostEffect {
    ClearValue,
    Blur,
}

impl HostEffect {
    pub fn name(self) -> &'static str {
        match self {
            HostEffect::ClearValue => "clear_value",
            HostEffect::Blur => "blur",
        }
    }
}

/// What an event handler returns: an optional update plus host effects.
#[derive(Clone, Debug, Default)]
pub struct Reaction {
    pub goal: Option<Goal>,
    pub effects: Vec<HostEffect>,
}

impl Reaction {
    pub fn none() -> Reaction {
        Reaction::default()
    }

    pub fn goal(goal: Goal) -> Reaction {
        Reaction { goal: Some(goal), effects: Vec::new() }
    }

    pub fn with_effect(mut self, e: HostEffect) -> Reaction {
        self.effects.push(e);
        self
    }
}

impl From<Goal> for Reaction {
    fn from(goal: Goal) -> Reaction {
        Reaction::goal(goal)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttrValue {
    Str(String),
    Num(f64),
    /// `false` removes the attribute.
    Bool(bool),
}

impl AttrValue {
    pub fn to_term(&self) -> Term {
        match self {
            AttrValue::Str(s) => Term::from(s.as_str()),
            AttrValue::Num(n) => Term::num(*n),
            AttrValue::Bool(b) => Term::from(*b),
        }
    }

    pub fn display(&self) -> String {
        match self {
            AttrValue::Str(s) => s.clone(),
            AttrValue::Num(n) => format_number(*n),
            AttrValue::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RenderOp {
    CreateElement { node_id: NodeId, tag: String, parent_id: Option<NodeId>, position_key: PositionKey },
    CreateText { node_id: NodeId, text: String, parent_id: Option<NodeId>, position_key: PositionKey },
    SetAttribute { node_id: NodeId, name: String, value: AttrValue },
    RemoveNode { node_id: NodeId },
    SetText { node_id: NodeId, text: String },
    HostEffect { node_id: NodeId, effect: HostEffect },
}

impl RenderOp {
    pub fn name(&self) -> &'static str {
        match self {
            RenderOp::CreateElement { .. } => "create_element",
            RenderOp::CreateText { .. } => "create_text",
            RenderOp::SetAttribute { .. } => "set_attribute",
            RenderOp::RemoveNode { .. } => "remove_node",
            RenderOp::SetText { .. } => "set_text",
            RenderOp::HostEffect { .. } => "host_effect",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MountError {
    #[error("slot {0} is not bound to a template")]
    FreeSlot(LVar),
    #[error("not a template: {0}")]
    NotTemplate(Term),
    #[error("property {name} must be an atom, got {value}")]
    BadProperty { name: String, value: Term },
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DispatchError {
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Mount(#[from] MountError),
    #[error("no node with id {0}")]
    UnknownNode(NodeId),
}

// Template builders.

/// `[{tagName: tag, ...props}, children...]`
pub fn el<'a>(tag: &str, props: impl IntoIterator<Item = (&'a str, Term)>, children: impl IntoIterator<Item = Term>) -> Term {
    let mut p: BTreeMap<Key, Term> = props.into_iter().map(|(k, v)| (Key::name(k), v)).collect();
    p.insert(Key::name("tagName"), Term::from(tag));
    Term::indexed(core::iter::once(Term::Compound(Compound::new(p))).chain(children))
}

/// Goal slot of arity 1.
pub fn slot(build: impl Fn(LVar) -> Goal + Send + Sync + 'static) -> Term {
    Term::handler(Handler::view(build))
}

/// Goal slot of arity 2: view and order variable.
pub fn ordered_slot(build: impl Fn(LVar, LVar) -> Goal + Send + Sync + 'static) -> Term {
    Term::handler(Handler::ordered_view(build))
}

pub fn on(f: impl Fn(&EventPayload, LVar) -> Reaction + Send + Sync + 'static) -> Term {
    Term::handler(Handler::event(f))
}

pub fn on_goal(goal: Goal) -> Term {
    Term::handler(Handler::goal(goal))
}

// Mounted structure.

#[derive(Clone)]
struct Scope {
    subst: Substitution,
    context: Vec<Goal>,
}

#[derive(Clone)]
struct Place {
    parent: Option<NodeId>,
    key: PositionKey,
}

impl Place {
    fn child(parent: NodeId, index: u32) -> Place {
        Place { parent: Some(parent), key: PositionKey(alloc::vec![KeyPart::Index(index)]) }
    }
}

#[derive(Clone)]
enum PropKind {
    Literal(Option<AttrValue>),
    Bound { term: Term, current: Option<AttrValue> },
    Event(Term),
}

#[derive(Clone)]
struct Prop {
    name: String,
    kind: PropKind,
}

#[derive(Clone)]
struct LeafMount {
    key: PositionKey,
    scope: Scope,
    content: MNode,
}

#[derive(Clone)]
struct DynamicSlot {
    tree: ViewTree,
    leaves: BTreeMap<Attachment, LeafMount>,
}

impl DynamicSlot {
    fn ordered(&self) -> Vec<&LeafMount> {
        let mut v: Vec<&LeafMount> = self.leaves.values().collect();
        v.sort_by(|a, b| a.key.cmp(&b.key));
        v
    }
}

#[derive(Clone)]
enum MNode {
    Empty,
    Text { id: NodeId, text: String },
    Element { id: NodeId, tag: String, props: Vec<Prop>, children: Vec<MNode> },
    Slot { var: LVar, resolved: Term, content: Box<MNode> },
    Dynamic(Box<DynamicSlot>),
}

fn attr_of(name: &str, value: &Term) -> Result<Option<AttrValue>, MountError> {
    match value {
        Term::Atom(Atom::Str(s)) => Ok(Some(AttrValue::Str(s.to_string()))),
        Term::Atom(Atom::Num(n)) => Ok(Some(AttrValue::Num(*n))),
        Term::Atom(Atom::Bool(true)) => Ok(Some(AttrValue::Bool(true))),
        Term::Atom(Atom::Bool(false)) | Term::Atom(Atom::Nil) => Ok(None),
        other => Err(MountError::BadProperty { name: name.to_string(), value: other.clone() }),
    }
}

fn resolve_attr(name: &str, term: &Term, scope: &Scope) -> Result<Option<AttrValue>, MountError> {
    match scope.subst.walk(term) {
        Term::Var(v) => Err(MountError::FreeSlot(v)),
        value => attr_of(name, &value),
    }
}

struct Mounter<'a> {
    next_id: &'a mut NodeId,
    ops: &'a mut Vec<RenderOp>,
    search: SearchConfig,
}

impl Mounter<'_> {
    fn id(&mut self) -> NodeId {
        let id = *self.next_id;
        *self.next_id += 1;
        id
    }

    fn mount(&mut self, tpl: &Term, scope: &Scope, place: &Place) -> Result<MNode, MountError> {
        match tpl {
            Term::Var(v) => {
                let value = scope.subst.walk(tpl);
                if value.is_var() {
                    return Err(MountError::FreeSlot(v.clone()));
                }
                let content = self.mount_value(&value, scope, place)?;
                Ok(MNode::Slot { var: v.clone(), resolved: value, content: Box::new(content) })
            }
            other => self.mount_value(other, scope, place),
        }
    }

    fn mount_value(&mut self, value: &Term, scope: &Scope, place: &Place) -> Result<MNode, MountError> {
        match value {
            Term::Var(_) => self.mount(value, scope, place),
            Term::Atom(Atom::Nil) => Ok(MNode::Empty),
            Term::Atom(Atom::Handler(h)) => {
                let tree = match ViewTree::from_handler(&scope.subst, h, self.search) {
                    Some(tree) => tree?,
                    None => return Err(MountError::NotTemplate(value.clone())),
                };
                let mut slot = DynamicSlot { tree, leaves: BTreeMap::new() };
                for leaf in slot.tree.ordered_answers() {
                    let lm = self.mount_leaf(&slot.tree, leaf, scope, place)?;
                    slot.leaves.insert(lm.0, lm.1);
                }
                Ok(MNode::Dynamic(Box::new(slot)))
            }
            Term::Atom(a) => {
                let text = a.display_text().expect("displayable atom");
                let id = self.id();
                self.ops.push(RenderOp::CreateText {
                    node_id: id,
                    text: text.clone(),
                    parent_id: place.parent,
                    position_key: place.key.clone(),
                });
                Ok(MNode::Text { id, text })
            }
            Term::Compound(c) => self.mount_element(c, value, scope, place),
        }
    }

    fn mount_leaf(
        &mut self,
        tree: &ViewTree,
        leaf: Leaf,
        parent: &Scope,
        place: &Place,
    ) -> Result<(Attachment, LeafMount), MountError> {
        let mut context = parent.context.clone();
        context.extend(leaf.context.iter().cloned());
        let scope = Scope { subst: leaf.substitution, context };
        let key = PositionKey::nested(&place.key, &leaf.key);
        let content =
            self.mount(&Term::Var(tree.view_var().clone()), &scope, &Place { parent: place.parent, key: key.clone() })?;
        Ok((leaf.attachment, LeafMount { key, scope, content }))
    }

    fn mount_element(&mut self, c: &Compound, whole: &Term, scope: &Scope, place: &Place) -> Result<MNode, MountError> {
        let not_template = || MountError::NotTemplate(whole.clone());
        let head = c.get(&Key::Index(0)).ok_or_else(not_template)?;
        let (tag, raw_props): (String, Vec<(String, Term)>) = match head {
            Term::Atom(Atom::Str(tag)) => (tag.to_string(), Vec::new()),
            Term::Compound(p) => {
                let tag = p.get_name("tagName").and_then(Term::as_str).ok_or_else(not_template)?;
                let mut props = Vec::new();
                for (k, v) in p.iter() {
                    let name = k.as_name().ok_or_else(not_template)?;
                    if name != "tagName" {
                        props.push((name.to_string(), v.clone()));
                    }
                }
                (tag.to_string(), props)
            }
            _ => return Err(not_template()),
        };
        let mut children_tpl = Vec::new();
        for (i, (k, v)) in c.iter().enumerate() {
            if *k != Key::Index(i as u32) {
                return Err(not_template());
            }
            if i > 0 {
                children_tpl.push(v.clone());
            }
        }
        let mut props = Vec::new();
        for (name, value) in raw_props {
            let kind = if name.starts_with("on") {
                PropKind::Event(value)
            } else if value.is_var() {
                let current = resolve_attr(&name, &value, scope)?;
                PropKind::Bound { term: value, current }
            } else {
                PropKind::Literal(attr_of(&name, &value)?)
            };
            props.push(Prop { name, kind });
        }
        let id = self.id();
        self.ops.push(RenderOp::CreateElement {
            node_id: id,
            tag: tag.clone(),
            parent_id: place.parent,
            position_key: place.key.clone(),
        });
        for p in &props {
            if let PropKind::Literal(Some(v)) | PropKind::Bound { current: Some(v), .. } = &p.kind {
                self.ops.push(RenderOp::SetAttribute { node_id: id, name: p.name.clone(), value: v.clone() });
            }
        }
        let mut children = Vec::with_capacity(children_tpl.len());
        for (i, t) in children_tpl.iter().enumerate() {
            children.push(self.mount(t, scope, &Place::child(id, i as u32))?);
        }
        Ok(MNode::Element { id, tag, props, children })
    }

    fn remove(&mut self, node: &MNode) {
        match node {
            MNode::Empty => {}
            MNode::Text { id, .. } | MNode::Element { id, .. } => self.ops.push(RenderOp::RemoveNode { node_id: *id }),
            MNode::Slot { content, .. } => self.remove(content),
            MNode::Dynamic(d) => {
                for lm in d.ordered() {
                    self.remove(&lm.content);
                }
            }
        }
    }

    fn refresh(&mut self, node: &mut MNode, scope: &Scope, place: &Place) -> Result<(), MountError> {
        match node {
            MNode::Empty | MNode::Text { .. } => Ok(()),
            MNode::Element { id, props, children, .. } => {
                for p in props.iter_mut() {
                    if let PropKind::Bound { term, current } = &mut p.kind {
                        let now = resolve_attr(&p.name, term, scope)?;
                        if now != *current {
                            let value = now.clone().unwrap_or(AttrValue::Bool(false));
                            self.ops.push(RenderOp::SetAttribute { node_id: *id, name: p.name.clone(), value });
                            *current = now;
                        }
                    }
                }
                let id = *id;
                for (i, c) in children.iter_mut().enumerate() {
                    self.refresh(c, scope, &Place::child(id, i as u32))?;
                }
                Ok(())
            }
            MNode::Slot { var, resolved, content } => {
                let now = scope.subst.walk(&Term::Var(var.clone()));
                if now.is_var() {
                    return Err(MountError::FreeSlot(var.clone()));
                }
                if now.identical(resolved) {
                    return self.refresh(content, scope, place);
                }
                let new_text = now.as_atom().filter(|a| !matches!(a, Atom::Handler(_))).and_then(Atom::display_text);
                if let (Some(text), MNode::Text { id, text: old }) = (&new_text, &mut **content) {
                    if text != old {
                        self.ops.push(RenderOp::SetText { node_id: *id, text: text.clone() });
                        *old = text.clone();
                    }
                } else {
                    self.remove(content);
                    **content = self.mount_value(&now, scope, place)?;
                }
                *resolved = now;
                Ok(())
            }
            MNode::Dynamic(d) => {
                d.tree.reexpand(&scope.subst)?;
                let current = d.tree.ordered_answers();
                let alive: BTreeMap<Attachment, ()> = current.iter().map(|l| (l.attachment, ())).collect();
                let mut gone: Vec<(PositionKey, Attachment)> =
                    d.leaves.iter().filter(|(a, _)| !alive.contains_key(a)).map(|(a, lm)| (lm.key.clone(), *a)).collect();
                gone.sort();
                for (_, a) in gone {
                    let lm = d.leaves.remove(&a).expect("leaf");
                    self.remove(&lm.content);
                }
                for leaf in current {
                    let key = PositionKey::nested(&place.key, &leaf.key);
                    let moved = d.leaves.get(&leaf.attachment).is_some_and(|lm| lm.key != key);
                    if moved {
                        let lm = d.leaves.remove(&leaf.attachment).expect("leaf");
                        self.remove(&lm.content);
                    }
                    match d.leaves.get_mut(&leaf.attachment) {
                        Some(lm) => {
                            let mut context = scope.context.clone();
                            context.extend(leaf.context.iter().cloned());
                            lm.scope = Scope { subst: leaf.substitution, context };
                            let sub_place = Place { parent: place.parent, key: lm.key.clone() };
                            let lscope = lm.scope.clone();
                            self.refresh(&mut lm.content, &lscope, &sub_place)?;
                        }
                        None => {
                            let (a, lm) = self.mount_leaf(&d.tree, leaf, scope, place)?;
                            d.leaves.insert(a, lm);
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn snapshot_into(node: &MNode, out: &mut Vec<Term>) {
    match node {
        MNode::Empty => {}
        MNode::Text { text, .. } => out.push(Term::record([("text", Term::from(text.as_str()))])),
        MNode::Element { tag, props, children, .. } => {
            let mut attrs = BTreeMap::new();
            for p in props {
                if let PropKind::Literal(Some(v)) | PropKind::Bound { current: Some(v), .. } = &p.kind {
                    attrs.insert(Key::name(&p.name), v.to_term());
                }
            }
            let mut kids = Vec::new();
            for c in children {
                snapshot_into(c, &mut kids);
            }
            out.push(Term::record([
                ("tag", Term::from(tag.as_str())),
                ("attrs", Term::Compound(Compound::new(attrs))),
                ("children", list(kids)),
            ]));
        }
        MNode::Slot { content, .. } => snapshot_into(content, out),
        MNode::Dynamic(d) => {
            for lm in d.ordered() {
                snapshot_into(&lm.content, out);
            }
        }
    }
}

/// Collapses top-level nodes: one node is returned as is, several as a list.
pub(crate) fn collapse_roots(mut nodes: Vec<Term>) -> Term {
    if nodes.len() == 1 {
        nodes.pop().unwrap()
    } else {
        list(nodes)
    }
}

fn find_element<'a>(node: &'a MNode, scope: &Scope, id: NodeId) -> Option<(&'a [Prop], Scope)> {
    match node {
        MNode::Empty | MNode::Text { .. } => None,
        MNode::Element { id: eid, props, children, .. } => {
            if *eid == id {
                return Some((props, scope.clone()));
            }
            children.iter().find_map(|c| find_element(c, scope, id))
        }
        MNode::Slot { content, .. } => find_element(content, scope, id),
        MNode::Dynamic(d) => d.leaves.values().find_map(|lm| find_element(&lm.content, &lm.scope, id)),
    }
}

fn collect_trees<'a>(node: &'a MNode, out: &mut Vec<&'a ViewTree>) {
    match node {
        MNode::Empty | MNode::Text { .. } => {}
        MNode::Element { children, .. } => children.iter().for_each(|c| collect_trees(c, out)),
        MNode::Slot { content, .. } => collect_trees(content, out),
        MNode::Dynamic(d) => {
            out.push(&d.tree);
            for lm in d.ordered() {
                collect_trees(&lm.content, out);
            }
        }
    }
}

/// A mounted template.
#[derive(Clone)]
pub struct ViewInstance {
    template: Term,
    root: MNode,
    next_id: NodeId,
    search: SearchConfig,
}

impl core::fmt::Debug for ViewInstance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "ViewInstance({})", self.snapshot())
    }
}

/// Mounts `tpl` against the system's current state.
pub fn mount(sys: &ReactiveSystem, tpl: &Term) -> Result<(ViewInstance, Vec<RenderOp>), MountError> {
    mount_at(&sys.substitution, tpl, sys.search)
}

pub fn mount_at(s: &Substitution, tpl: &Term, search: SearchConfig) -> Result<(ViewInstance, Vec<RenderOp>), MountError> {
    let mut next_id = 1;
    let mut ops = Vec::new();
    let scope = Scope { subst: s.clone(), context: Vec::new() };
    let root = Mounter { next_id: &mut next_id, ops: &mut ops, search }.mount(
        tpl,
        &scope,
        &Place { parent: None, key: PositionKey(Vec::new()) },
    )?;
    Ok((ViewInstance { template: tpl.clone(), root, next_id, search }, ops))
}

impl ViewInstance {
    pub fn template(&self) -> &Term {
        &self.template
    }

    /// Brings the display up to date with `s`. On error nothing changes.
    pub fn refresh(&mut self, s: &Substitution) -> Result<Vec<RenderOp>, MountError> {
        let mut next = self.clone();
        let mut ops = Vec::new();
        let scope = Scope { subst: s.clone(), context: Vec::new() };
        let place = Place { parent: None, key: PositionKey(Vec::new()) };
        Mounter { next_id: &mut next.next_id, ops: &mut ops, search: self.search }.refresh(&mut next.root, &scope, &place)?;
        *self = next;
        Ok(ops)
    }

    /// Current display as `{tag, attrs, children}` / `{text}` terms.
    pub fn snapshot(&self) -> Term {
        let mut out = Vec::new();
        snapshot_into(&self.root, &mut out);
        collapse_roots(out)
    }

    /// Every goal slot's view tree, in document order.
    pub fn view_trees(&self) -> Vec<&ViewTree> {
        let mut out = Vec::new();
        collect_trees(&self.root, &mut out);
        out
    }

    /// The lexical context goals and handler bound to `event_type` on `node`.
    fn handler(&self, node: NodeId, event_type: &str) -> Option<(Option<Term>, Scope)> {
        let scope = Scope { subst: Substitution::new(), context: Vec::new() };
        let (props, scope) = find_element(&self.root, &scope, node)?;
        let name = alloc::format!("on{}", event_type);
        let handler = props.iter().find(|p| p.name == name).and_then(|p| match &p.kind {
            PropKind::Event(t) => Some(t.clone()),
            _ => None,
        });
        Some((handler, scope))
    }
}

/// Runs the handler for `event_type` on `node`. Returns the next system
/// state and the ops for host effects and display changes. On error the
/// instance is left as it was.
pub fn dispatch_event(
    sys: &ReactiveSystem,
    instance: &mut ViewInstance,
    node: NodeId,
    payload: &EventPayload,
) -> Result<(ReactiveSystem, Vec<RenderOp>), DispatchError> {
    let (handler, scope) = instance.handler(node, &payload.event_type).ok_or(DispatchError::UnknownNode(node))?;
    let Some(handler) = handler else {
        log::warn!("node {} has no handler for {:?}; ignored", node, payload.event_type);
        return Ok((sys.clone(), Vec::new()));
    };
    let handler_value = scope.subst.walk(&handler);
    let mut context = scope.context;
    let reaction = match handler_value.as_atom() {
        Some(Atom::Handler(h)) => match h.kind() {
            HandlerKind::Goal(g) => Reaction::goal(g.clone()),
            HandlerKind::Event(f) => {
                let value = LVar::named("value");
                if let Some(v) = &payload.target_value {
                    context.push(eq(&value, v.as_str()));
                }
                let f: &Arc<_> = f;
                f(payload, value)
            }
            HandlerKind::View { .. } => {
                log::warn!("node {} binds a view as {:?} handler; ignored", node, payload.event_type);
                return Ok((sys.clone(), Vec::new()));
            }
        },
        _ => {
            log::warn!("handler for {:?} on node {} is not callable: {}", payload.event_type, node, handler_value);
            return Ok((sys.clone(), Vec::new()));
        }
    };
    let mut ops: Vec<RenderOp> = reaction.effects.iter().map(|e| RenderOp::HostEffect { node_id: node, effect: *e }).collect();
    let Some(goal) = reaction.goal else {
        return Ok((sys.clone(), ops));
    };
    let next = sys.step(&goal, &context)?;
    ops.extend(instance.refresh(&next.substitution)?);
    Ok((next, ops))
}
