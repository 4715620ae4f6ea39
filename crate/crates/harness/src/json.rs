//! Terms as JSON.
//!
//! Proper lists (including `nil`) become arrays, records become objects
//! with sorted keys, and an improper pair stays the object `{car, cdr}`.
//! `null` reads back as `nil`.

use rekanren_core::term::{Atom, Compound, Key, Term};
use serde_json::{Map, Number, Value};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum JsonError {
    #[error("free variable {0} cannot be serialized")]
    FreeVariable(String),
    #[error("handler {0} cannot be serialized")]
    Handler(String),
    #[error("positional compound {0} cannot be serialized")]
    Positional(String),
    #[error("number {0} has no JSON form")]
    Number(f64),
}

pub fn term_to_json(t: &Term) -> Result<Value, JsonError> {
    if let Some(items) = t.list_items() {
        return items.iter().map(term_to_json).collect::<Result<_, _>>().map(Value::Array);
    }
    match t {
        Term::Var(v) => Err(JsonError::FreeVariable(v.to_string())),
        Term::Atom(Atom::Nil) => Ok(Value::Array(vec![])),
        Term::Atom(Atom::Bool(b)) => Ok(Value::Bool(*b)),
        Term::Atom(Atom::Num(n)) => number(*n),
        Term::Atom(Atom::Str(s)) => Ok(Value::String(s.to_string())),
        Term::Atom(Atom::Handler(h)) => Err(JsonError::Handler(format!("{:?}", h))),
        Term::Compound(c) => {
            let mut m = Map::new();
            for (k, v) in c.iter() {
                let Some(name) = k.as_name() else {
                    return Err(JsonError::Positional(t.to_string()));
                };
                m.insert(name.to_string(), term_to_json(v)?);
            }
            Ok(Value::Object(m))
        }
    }
}

fn number(n: f64) -> Result<Value, JsonError> {
    if n.fract() == 0.0 && n.abs() < 9.007e15 {
        return Ok(Value::Number(Number::from(n as i64)));
    }
    Number::from_f64(n).map(Value::Number).ok_or(JsonError::Number(n))
}

pub fn json_to_term(v: &Value) -> Term {
    match v {
        Value::Null => Term::nil(),
        Value::Bool(b) => Term::from(*b),
        Value::Number(n) => Term::num(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => Term::from(s.as_str()),
        Value::Array(items) => rekanren_core::list(items.iter().map(json_to_term)),
        Value::Object(m) => Term::Compound(Compound::new(m.iter().map(|(k, v)| (Key::name(k), json_to_term(v))).collect())),
    }
}

/// Compact JSON text. Object keys come out sorted.
pub fn to_string(t: &Term) -> Result<String, JsonError> {
    Ok(term_to_json(t)?.to_string())
}

pub fn to_string_pretty(t: &Term) -> Result<String, JsonError> {
    Ok(serde_json::to_string_pretty(&term_to_json(t)?).expect("json values always print"))
}
