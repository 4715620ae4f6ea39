//! Wire formats: render ops as newline-delimited JSON, event payloads,
//! patches and view-tree dumps.

use rekanren_core::reactive::Patch;
use rekanren_core::template::{AttrValue, NodeId};
use rekanren_core::view_tree::{DumpNode, KeyPart, OrderKey, PositionKey};
use rekanren_core::{EventPayload, HostEffect, RenderOp};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::json::{term_to_json, JsonError};

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("malformed op record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn key_to_json(k: &PositionKey) -> Value {
    Value::Array(
        k.0.iter()
            .map(|p| match p {
                KeyPart::Index(i) => json!(i),
                KeyPart::Order(None) => Value::Null,
                KeyPart::Order(Some(OrderKey::Num(n))) => json!({ "n": n }),
                KeyPart::Order(Some(OrderKey::Str(s))) => json!({ "s": &**s }),
                KeyPart::Order(Some(OrderKey::Other(s))) => json!({ "o": s }),
            })
            .collect(),
    )
}

pub fn key_from_json(v: &Value) -> Result<PositionKey, WireError> {
    let bad = || WireError::Malformed(format!("position key {}", v));
    let parts = v.as_array().ok_or_else(bad)?;
    let mut out = Vec::new();
    for p in parts {
        out.push(match p {
            Value::Null => KeyPart::Order(None),
            Value::Number(n) => KeyPart::Index(n.as_u64().and_then(|n| u32::try_from(n).ok()).ok_or_else(bad)?),
            Value::Object(m) => match m.iter().next() {
                Some((k, Value::Number(n))) if k == "n" => KeyPart::Order(Some(OrderKey::Num(n.as_f64().ok_or_else(bad)?))),
                Some((k, Value::String(s))) if k == "s" => KeyPart::Order(Some(OrderKey::Str(s.as_str().into()))),
                Some((k, Value::String(s))) if k == "o" => KeyPart::Order(Some(OrderKey::Other(s.clone()))),
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        });
    }
    Ok(PositionKey(out))
}

fn attr_to_json(v: &AttrValue) -> Value {
    match v {
        AttrValue::Str(s) => json!(s),
        AttrValue::Num(n) => term_to_json(&v.to_term()).unwrap_or_else(|_| json!(n.to_string())),
        AttrValue::Bool(b) => json!(b),
    }
}

pub fn op_to_json(op: &RenderOp) -> Value {
    let mut v = match op {
        RenderOp::CreateElement { node_id, tag, parent_id, position_key } => {
            json!({ "node_id": node_id, "tag": tag, "parent_id": parent_id, "position_key": key_to_json(position_key) })
        }
        RenderOp::CreateText { node_id, text, parent_id, position_key } => {
            json!({ "node_id": node_id, "text": text, "parent_id": parent_id, "position_key": key_to_json(position_key) })
        }
        RenderOp::SetAttribute { node_id, name, value } => {
            json!({ "node_id": node_id, "name": name, "value": attr_to_json(value) })
        }
        RenderOp::RemoveNode { node_id } => json!({ "node_id": node_id }),
        RenderOp::SetText { node_id, text } => json!({ "node_id": node_id, "text": text }),
        RenderOp::HostEffect { node_id, effect } => json!({ "node_id": node_id, "effect": effect.name() }),
    };
    v["op"] = json!(op.name());
    v
}

/// One line of the op log.
pub fn op_line(op: &RenderOp) -> String {
    op_to_json(op).to_string()
}

pub fn op_from_json(v: &Value) -> Result<RenderOp, WireError> {
    let bad = |what: &str| WireError::Malformed(format!("{}: {}", what, v));
    let id = |field: &str| v.get(field).and_then(Value::as_u64).ok_or_else(|| bad(field));
    let text = |field: &str| v.get(field).and_then(Value::as_str).map(str::to_string).ok_or_else(|| bad(field));
    let parent = || -> Result<Option<NodeId>, WireError> {
        match v.get("parent_id") {
            None | Some(Value::Null) => Ok(None),
            Some(p) => p.as_u64().map(Some).ok_or_else(|| bad("parent_id")),
        }
    };
    let key = || key_from_json(v.get("position_key").ok_or_else(|| bad("position_key"))?);
    let op = v.get("op").and_then(Value::as_str).ok_or_else(|| bad("op"))?;
    Ok(match op {
        "create_element" => {
            RenderOp::CreateElement { node_id: id("node_id")?, tag: text("tag")?, parent_id: parent()?, position_key: key()? }
        }
        "create_text" => {
            RenderOp::CreateText { node_id: id("node_id")?, text: text("text")?, parent_id: parent()?, position_key: key()? }
        }
        "set_attribute" => {
            let value = match v.get("value") {
                Some(Value::String(s)) => AttrValue::Str(s.clone()),
                Some(Value::Bool(b)) => AttrValue::Bool(*b),
                Some(Value::Number(n)) => AttrValue::Num(n.as_f64().ok_or_else(|| bad("value"))?),
                _ => return Err(bad("value")),
            };
            RenderOp::SetAttribute { node_id: id("node_id")?, name: text("name")?, value }
        }
        "remove_node" => RenderOp::RemoveNode { node_id: id("node_id")? },
        "set_text" => RenderOp::SetText { node_id: id("node_id")?, text: text("text")? },
        "host_effect" => {
            let effect = match text("effect")?.as_str() {
                "clear_value" => HostEffect::ClearValue,
                "blur" => HostEffect::Blur,
                _ => return Err(bad("effect")),
            };
            RenderOp::HostEffect { node_id: id("node_id")?, effect }
        }
        _ => return Err(bad("op")),
    })
}

/// Parses a whole op log, skipping blank lines.
pub fn parse_op_log(text: &str) -> Result<Vec<RenderOp>, WireError> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| op_from_json(&serde_json::from_str(l)?)).collect()
}

/// JSON shape of [`EventPayload`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checked: Option<bool>,
}

impl PayloadJson {
    pub fn into_payload(self, event_type: &str) -> EventPayload {
        EventPayload { event_type: event_type.to_string(), key: self.key, target_value: self.target_value, checked: self.checked }
    }
}

pub fn payload_to_json(p: &EventPayload) -> Value {
    let mut v =
        serde_json::to_value(PayloadJson { key: p.key.clone(), target_value: p.target_value.clone(), checked: p.checked })
            .expect("payload serializes");
    v["event_type"] = json!(p.event_type);
    v
}

pub fn patch_to_json(p: &Patch) -> Result<Value, JsonError> {
    p.entries
        .iter()
        .map(|e| Ok(json!({ "target_id": e.target.id(), "value": term_to_json(&e.value)? })))
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
}

pub fn dump_to_json(d: &DumpNode) -> Value {
    let (kind, status) = match d.kind {
        "branch" => ("branch", "expanded"),
        other => ("leaf", other),
    };
    let mut v = json!({
        "kind": kind,
        "status": status,
        "conjunction": d.conjunction,
        "path": d.path,
    });
    if let Some(a) = d.attachment {
        v["attachment"] = json!(a);
    }
    if !d.children.is_empty() {
        v["children"] = Value::Array(d.children.iter().map(dump_to_json).collect());
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ops_round_trip() {
        let key = PositionKey(vec![
            KeyPart::Order(Some(OrderKey::Num(1.0))),
            KeyPart::Index(3),
            KeyPart::Order(None),
            KeyPart::Order(Some(OrderKey::Str("a".into()))),
        ]);
        let ops = vec![
            RenderOp::CreateElement { node_id: 1, tag: "p".into(), parent_id: None, position_key: key.clone() },
            RenderOp::CreateText { node_id: 2, text: "x".into(), parent_id: Some(1), position_key: key },
            RenderOp::SetAttribute { node_id: 1, name: "checked".into(), value: AttrValue::Bool(true) },
            RenderOp::SetAttribute { node_id: 1, name: "n".into(), value: AttrValue::Num(2.0) },
            RenderOp::SetText { node_id: 2, text: "y".into() },
            RenderOp::HostEffect { node_id: 1, effect: HostEffect::Blur },
            RenderOp::RemoveNode { node_id: 1 },
        ];
        let log: String = ops.iter().map(|o| op_line(o) + "\n").collect();
        assert_eq!(parse_op_log(&log).unwrap(), ops);
        assert_eq!(
            op_line(&ops[0]),
            r#"{"node_id":1,"op":"create_element","parent_id":null,"position_key":[{"n":1.0},3,null,{"s":"a"}],"tag":"p"}"#
        );
        assert_eq!(op_line(&ops[3]), r#"{"name":"n","node_id":1,"op":"set_attribute","value":2}"#);
    }

    #[test]
    fn payload_shape() {
        let p = EventPayload::new("keydown").with_key("Enter").with_value("milk");
        assert_eq!(payload_to_json(&p), json!({"event_type": "keydown", "key": "Enter", "target_value": "milk"}));
        let back: PayloadJson = serde_json::from_value(json!({"key": "Enter", "target_value": "milk"})).unwrap();
        assert_eq!(back.into_payload("keydown"), p);
    }
}
