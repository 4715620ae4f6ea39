//! An abstract display tree driven only by [`RenderOp`]s.
//!
//! Applying an op batch here and comparing with
//! [`ViewInstance::snapshot`](crate::template::ViewInstance::snapshot)
//! checks that the ops are sufficient on their own.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::template::{collapse_roots, AttrValue, NodeId, RenderOp};
use crate::term::{list, Compound, Key, Term};
use crate::view_tree::PositionKey;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DomError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} created twice")]
    DuplicateNode(NodeId),
    #[error("node {0} is not an element")]
    NotElement(NodeId),
    #[error("node {0} is not a text node")]
    NotText(NodeId),
    #[error("two siblings of node {parent:?} share position key {key}")]
    KeyClash { parent: Option<NodeId>, key: String },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomKind {
    Element { tag: String, attrs: BTreeMap<String, AttrValue> },
    Text(String),
}

#[derive(Clone, Debug)]
pub struct DomNode {
    pub id: NodeId,
    pub kind: DomKind,
    pub parent: Option<NodeId>,
    pub key: PositionKey,
    children: Vec<NodeId>,
}

impl DomNode {
    pub fn tag(&self) -> Option<&str> {
        match &self.kind {
            DomKind::Element { tag, .. } => Some(tag),
            DomKind::Text(_) => None,
        }
    }

    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        match &self.kind {
            DomKind::Element { attrs, .. } => attrs.get(name),
            DomKind::Text(_) => None,
        }
    }

    pub fn attrs(&self) -> Option<&BTreeMap<String, AttrValue>> {
        match &self.kind {
            DomKind::Element { attrs, .. } => Some(attrs),
            DomKind::Text(_) => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.kind {
            DomKind::Text(t) => Some(t),
            DomKind::Element { .. } => None,
        }
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    /// Whitespace-separated class list from `className` or `class`.
    pub fn has_class(&self, class: &str) -> bool {
        ["className", "class"].iter().any(|n| match self.attr(n) {
            Some(AttrValue::Str(s)) => s.split_whitespace().any(|c| c == class),
            _ => false,
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct DomTree {
    nodes: BTreeMap<NodeId, DomNode>,
    roots: Vec<NodeId>,
}

impl DomTree {
    pub fn new() -> DomTree {
        DomTree::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&DomNode> {
        self.nodes.get(&id)
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    fn insert_child(&mut self, parent: Option<NodeId>, id: NodeId, key: &PositionKey) -> Result<(), DomError> {
        let siblings: Vec<NodeId> = match parent {
            Some(p) => match self.nodes.get(&p) {
                Some(n) if matches!(n.kind, DomKind::Element { .. }) => n.children.clone(),
                Some(_) => return Err(DomError::NotElement(p)),
                None => return Err(DomError::UnknownNode(p)),
            },
            None => self.roots.clone(),
        };
        let keys: Vec<&PositionKey> = siblings.iter().map(|s| &self.nodes[s].key).collect();
        let pos = match keys.binary_search(&key) {
            Ok(_) => return Err(DomError::KeyClash { parent, key: key.render() }),
            Err(pos) => pos,
        };
        match parent {
            Some(p) => self.nodes.get_mut(&p).unwrap().children.insert(pos, id),
            None => self.roots.insert(pos, id),
        }
        Ok(())
    }

    fn create(&mut self, id: NodeId, kind: DomKind, parent: Option<NodeId>, key: &PositionKey) -> Result<(), DomError> {
        if self.nodes.contains_key(&id) {
            return Err(DomError::DuplicateNode(id));
        }
        self.insert_child(parent, id, key)?;
        self.nodes.insert(id, DomNode { id, kind, parent, key: key.clone(), children: Vec::new() });
        Ok(())
    }

    fn forget(&mut self, id: NodeId) {
        if let Some(n) = self.nodes.remove(&id) {
            for c in n.children {
                self.forget(c);
            }
        }
    }

    pub fn apply(&mut self, op: &RenderOp) -> Result<(), DomError> {
        match op {
            RenderOp::CreateElement { node_id, tag, parent_id, position_key } => {
                self.create(*node_id, DomKind::Element { tag: tag.clone(), attrs: BTreeMap::new() }, *parent_id, position_key)
            }
            RenderOp::CreateText { node_id, text, parent_id, position_key } => {
                self.create(*node_id, DomKind::Text(text.clone()), *parent_id, position_key)
            }
            RenderOp::SetAttribute { node_id, name, value } => {
                let node = self.nodes.get_mut(node_id).ok_or(DomError::UnknownNode(*node_id))?;
                let DomKind::Element { attrs, .. } = &mut node.kind else {
                    return Err(DomError::NotElement(*node_id));
                };
                if *value == AttrValue::Bool(false) {
                    attrs.remove(name);
                } else {
                    attrs.insert(name.clone(), value.clone());
                }
                Ok(())
            }
            RenderOp::SetText { node_id, text } => {
                let node = self.nodes.get_mut(node_id).ok_or(DomError::UnknownNode(*node_id))?;
                let DomKind::Text(t) = &mut node.kind else {
                    return Err(DomError::NotText(*node_id));
                };
                *t = text.clone();
                Ok(())
            }
            RenderOp::RemoveNode { node_id } => {
                let node = self.nodes.get(node_id).ok_or(DomError::UnknownNode(*node_id))?;
                match node.parent {
                    Some(p) => {
                        if let Some(pn) = self.nodes.get_mut(&p) {
                            pn.children.retain(|c| c != node_id);
                        }
                    }
                    None => self.roots.retain(|c| c != node_id),
                }
                self.forget(*node_id);
                Ok(())
            }
            RenderOp::HostEffect { node_id, .. } => {
                // live-only state (input contents, focus) is not modelled
                self.nodes.get(node_id).map(|_| ()).ok_or(DomError::UnknownNode(*node_id))
            }
        }
    }

    pub fn apply_all(&mut self, ops: &[RenderOp]) -> Result<(), DomError> {
        ops.iter().try_for_each(|op| self.apply(op))
    }

    fn node_term(&self, id: NodeId) -> Term {
        let n = &self.nodes[&id];
        match &n.kind {
            DomKind::Text(t) => Term::record([("text", Term::from(t.as_str()))]),
            DomKind::Element { tag, attrs } => {
                let attrs: BTreeMap<Key, Term> = attrs.iter().map(|(k, v)| (Key::name(k), v.to_term())).collect();
                Term::record([
                    ("tag", Term::from(tag.as_str())),
                    ("attrs", Term::Compound(Compound::new(attrs))),
                    ("children", list(n.children.iter().map(|c| self.node_term(*c)))),
                ])
            }
        }
    }

    /// Same dialect as the instance snapshot.
    pub fn snapshot(&self) -> Term {
        collapse_roots(self.roots.iter().map(|r| self.node_term(*r)).collect())
    }

    /// Node ids in document order.
    pub fn document_order(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.roots.iter().rev().cloned().collect();
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[&id].children.iter().rev().cloned());
        }
        out
    }

    pub fn find(&self, pred: impl Fn(&DomNode) -> bool) -> Option<NodeId> {
        self.document_order().into_iter().find(|id| pred(&self.nodes[id]))
    }

    pub fn find_all(&self, pred: impl Fn(&DomNode) -> bool) -> Vec<NodeId> {
        self.document_order().into_iter().filter(|id| pred(&self.nodes[id])).collect()
    }

    /// Concatenated text of all descendant text nodes.
    pub fn text_content(&self, id: NodeId) -> String {
        let mut out = String::new();
        let mut stack = alloc::vec![id];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[&id];
            if let Some(t) = n.text() {
                out.push_str(t);
            }
            stack.extend(n.children.iter().rev().cloned());
        }
        out
    }

    /// `true` when `ancestor` is a strict ancestor of `id`.
    pub fn is_ancestor(&self, ancestor: NodeId, id: NodeId) -> bool {
        let mut cur = self.nodes.get(&id).and_then(|n| n.parent);
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes.get(&p).and_then(|n| n.parent);
        }
        false
    }
}
