//! Terms: atoms, compounds and logic variables.
//!
//! A [`Term`] is the universe of model and view values. Compounds are
//! ordered maps from string or integer keys to terms; a cons pair is the
//! compound holding exactly the keys `car` and `cdr`, and `nil` is a
//! distinguished atom.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::goal::Goal;
use crate::template::{EventPayload, Reaction};

static NEXT_VAR: AtomicU64 = AtomicU64::new(1);

/// A logic variable. Equality, ordering and hashing use the id only.
#[derive(Clone)]
pub struct LVar {
    id: u64,
    label: Option<Arc<str>>,
}

/// Returns a variable whose id is strictly greater than every id issued so far.
pub fn fresh_var(label: Option<&str>) -> LVar {
    LVar { id: NEXT_VAR.fetch_add(1, AtomicOrdering::Relaxed), label: label.map(Arc::from) }
}

impl LVar {
    pub fn fresh() -> LVar {
        fresh_var(None)
    }

    pub fn named(label: &str) -> LVar {
        fresh_var(Some(label))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

impl PartialEq for LVar {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for LVar {}

impl PartialOrd for LVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

impl core::hash::Hash for LVar {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl fmt::Debug for LVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(label) => write!(f, "{}#{}", label, self.id),
            None => write!(f, "_#{}", self.id),
        }
    }
}

/// Goal constructor placed in a template: receives the fresh view variable
/// and, for arity 2, the order variable.
pub type ViewFn = dyn Fn(LVar, Option<LVar>) -> Goal + Send + Sync;

/// Event handler: receives the event payload and a fresh variable that the
/// runtime unifies with the payload's target value.
pub type EventFn = dyn Fn(&EventPayload, LVar) -> Reaction + Send + Sync;

pub enum HandlerKind {
    View { arity: u8, build: Arc<ViewFn> },
    Event(Arc<EventFn>),
    Goal(Goal),
}

/// Opaque host value stored as an atom. Compares by identity.
#[derive(Clone)]
pub struct Handler(Arc<HandlerKind>);

impl Handler {
    pub fn view(build: impl Fn(LVar) -> Goal + Send + Sync + 'static) -> Handler {
        Handler(Arc::new(HandlerKind::View { arity: 1, build: Arc::new(move |v, _| build(v)) }))
    }

    pub fn ordered_view(build: impl Fn(LVar, LVar) -> Goal + Send + Sync + 'static) -> Handler {
        Handler(Arc::new(HandlerKind::View {
            arity: 2,
            build: Arc::new(move |v, o| build(v, o.expect("ordered view built without order variable"))),
        }))
    }

    pub fn event(f: impl Fn(&EventPayload, LVar) -> Reaction + Send + Sync + 'static) -> Handler {
        Handler(Arc::new(HandlerKind::Event(Arc::new(f))))
    }

    pub fn goal(goal: Goal) -> Handler {
        Handler(Arc::new(HandlerKind::Goal(goal)))
    }

    pub fn kind(&self) -> &HandlerKind {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Handler) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }
}

impl fmt::Debug for Handler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind() {
            HandlerKind::View { .. } => "view",
            HandlerKind::Event(_) => "event",
            HandlerKind::Goal(_) => "goal",
        };
        write!(f, "#<{} handler {:x}>", kind, self.addr())
    }
}

#[derive(Clone, Debug)]
pub enum Atom {
    Nil,
    Bool(bool),
    Num(f64),
    Str(Arc<str>),
    Handler(Handler),
}

impl Atom {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Atom::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Text shown when the atom is rendered as a text node.
    pub fn display_text(&self) -> Option<String> {
        use alloc::string::ToString;
        match self {
            Atom::Str(s) => Some(s.to_string()),
            Atom::Num(n) => Some(format_number(*n)),
            Atom::Bool(b) => Some(b.to_string()),
            Atom::Nil | Atom::Handler(_) => None,
        }
    }
}

pub(crate) fn format_number(n: f64) -> String {
    use alloc::string::ToString;
    if n.abs() < 9.007_199_254_740_992e15 && n == (n as i64) as f64 {
        (n as i64).to_string()
    } else {
        n.to_string()
    }
}

// Numbers compare numerically, strings bytewise, handlers by identity.
impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Atom::Nil, Atom::Nil) => true,
            (Atom::Bool(a), Atom::Bool(b)) => a == b,
            (Atom::Num(a), Atom::Num(b)) => a == b,
            (Atom::Str(a), Atom::Str(b)) => a == b,
            (Atom::Handler(a), Atom::Handler(b)) => a.ptr_eq(b),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Key {
    Index(u32),
    Name(Arc<str>),
}

impl Key {
    pub fn name(s: &str) -> Key {
        Key::Name(Arc::from(s))
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            Key::Name(s) => Some(s),
            Key::Index(_) => None,
        }
    }
}

impl From<&str> for Key {
    fn from(s: &str) -> Key {
        Key::name(s)
    }
}

impl From<u32> for Key {
    fn from(i: u32) -> Key {
        Key::Index(i)
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Index(i) => write!(f, "{}", i),
            Key::Name(s) => write!(f, "{}", s),
        }
    }
}

/// Shared, immutable key-value structure. Two compounds are *identical* when
/// they share storage; structural equality is `PartialEq`.
#[derive(Clone)]
pub struct Compound(Arc<BTreeMap<Key, Term>>);

impl Compound {
    pub fn new(entries: BTreeMap<Key, Term>) -> Compound {
        Compound(Arc::new(entries))
    }

    pub fn from_entries<K: Into<Key>, T: Into<Term>>(entries: impl IntoIterator<Item = (K, T)>) -> Compound {
        Compound::new(entries.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }

    pub fn get(&self, key: &Key) -> Option<&Term> {
        self.0.get(key)
    }

    pub fn get_name(&self, key: &str) -> Option<&Term> {
        self.0.get(&Key::name(key))
    }

    pub fn contains(&self, key: &Key) -> bool {
        self.0.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Term)> {
        self.0.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.0.keys()
    }

    pub fn values(&self) -> impl Iterator<Item = &Term> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ptr_eq(&self, other: &Compound) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn entries(&self) -> &BTreeMap<Key, Term> {
        &self.0
    }

    /// `Some((car, cdr))` when this is a cons pair.
    pub fn as_pair(&self) -> Option<(&Term, &Term)> {
        if self.0.len() != 2 {
            return None;
        }
        Some((self.get_name("car")?, self.get_name("cdr")?))
    }

    pub fn is_pair(&self) -> bool {
        self.as_pair().is_some()
    }
}

impl PartialEq for Compound {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || self.0 == other.0
    }
}

impl fmt::Debug for Compound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Term::Compound(self.clone()), f)
    }
}

#[derive(Clone)]
pub enum Term {
    Var(LVar),
    Atom(Atom),
    Compound(Compound),
}

impl Term {
    pub fn nil() -> Term {
        Term::Atom(Atom::Nil)
    }

    pub fn str(s: &str) -> Term {
        Term::Atom(Atom::Str(Arc::from(s)))
    }

    pub fn num(n: f64) -> Term {
        Term::Atom(Atom::Num(n))
    }

    pub fn bool(b: bool) -> Term {
        Term::Atom(Atom::Bool(b))
    }

    pub fn handler(h: Handler) -> Term {
        Term::Atom(Atom::Handler(h))
    }

    pub fn record<K: Into<Key>, T: Into<Term>>(entries: impl IntoIterator<Item = (K, T)>) -> Term {
        Term::Compound(Compound::from_entries(entries))
    }

    /// Compound with integer keys `0..n`.
    pub fn indexed(items: impl IntoIterator<Item = Term>) -> Term {
        Term::Compound(Compound::new(items.into_iter().enumerate().map(|(i, t)| (Key::Index(i as u32), t)).collect()))
    }

    pub fn as_var(&self) -> Option<&LVar> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Term::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_compound(&self) -> Option<&Compound> {
        match self {
            Term::Compound(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        self.as_atom().and_then(Atom::as_str)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Atom(Atom::Nil))
    }

    pub fn is_pair(&self) -> bool {
        self.as_compound().is_some_and(Compound::is_pair)
    }

    pub fn as_pair(&self) -> Option<(&Term, &Term)> {
        self.as_compound().and_then(Compound::as_pair)
    }

    /// Identity in the sense of the host's `===`: atoms by value, compounds
    /// by shared storage, variables by id.
    pub fn identical(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Compound(a), Term::Compound(b)) => a.ptr_eq(b),
            _ => false,
        }
    }

    /// True when no variable occurs anywhere in the term.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) => true,
            Term::Compound(c) => c.values().all(Term::is_ground),
        }
    }

    /// Collects every variable occurring in the term, in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<LVar>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::Atom(_) => {}
            Term::Compound(c) => c.values().for_each(|t| t.collect_vars(out)),
        }
    }

    /// Elements of a proper cons list, or `None` for any other term.
    pub fn list_items(&self) -> Option<Vec<Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            if cur.is_nil() {
                return Some(items);
            }
            let (car, cdr) = cur.as_pair()?;
            items.push(car.clone());
            cur = cdr;
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a == b,
            (Term::Atom(a), Term::Atom(b)) => a == b,
            (Term::Compound(a), Term::Compound(b)) => a == b,
            _ => false,
        }
    }
}

pub fn cons(car: impl Into<Term>, cdr: impl Into<Term>) -> Term {
    Term::record([("car", car.into()), ("cdr", cdr.into())])
}

pub fn nil() -> Term {
    Term::nil()
}

pub fn list<T: Into<Term>>(items: impl IntoIterator<Item = T>) -> Term {
    let items: Vec<Term> = items.into_iter().map(Into::into).collect();
    items.into_iter().rev().fold(Term::nil(), |tail, head| cons(head, tail))
}

impl From<LVar> for Term {
    fn from(v: LVar) -> Term {
        Term::Var(v)
    }
}

impl From<&LVar> for Term {
    fn from(v: &LVar) -> Term {
        Term::Var(v.clone())
    }
}

impl From<&Term> for Term {
    fn from(t: &Term) -> Term {
        t.clone()
    }
}

impl From<Atom> for Term {
    fn from(a: Atom) -> Term {
        Term::Atom(a)
    }
}

impl From<Compound> for Term {
    fn from(c: Compound) -> Term {
        Term::Compound(c)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Term {
        Term::str(s)
    }
}

impl From<String> for Term {
    fn from(s: String) -> Term {
        Term::Atom(Atom::Str(Arc::from(s)))
    }
}

impl From<bool> for Term {
    fn from(b: bool) -> Term {
        Term::bool(b)
    }
}

impl From<f64> for Term {
    fn from(n: f64) -> Term {
        Term::num(n)
    }
}

impl From<i64> for Term {
    fn from(n: i64) -> Term {
        Term::num(n as f64)
    }
}

impl From<i32> for Term {
    fn from(n: i32) -> Term {
        Term::num(n as f64)
    }
}

impl From<Handler> for Term {
    fn from(h: Handler) -> Term {
        Term::handler(h)
    }
}

fn write_str_lit(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    write!(f, "{:?}", s)
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Nil => f.write_str("()"),
            Atom::Bool(b) => write!(f, "{}", b),
            Atom::Num(n) => f.write_str(&format_number(*n)),
            Atom::Str(s) => write_str_lit(f, s),
            Atom::Handler(h) => write!(f, "{:?}", h),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Atom(a) => write!(f, "{}", a),
            Term::Compound(c) => {
                if c.is_pair() {
                    f.write_str("(")?;
                    let mut cur = self;
                    let mut first = true;
                    while let Some((car, cdr)) = cur.as_pair() {
                        if !first {
                            f.write_str(" ")?;
                        }
                        first = false;
                        write!(f, "{}", car)?;
                        cur = cdr;
                    }
                    if !cur.is_nil() {
                        write!(f, " . {}", cur)?;
                    }
                    f.write_str(")")
                } else {
                    f.write_str("{")?;
                    for (i, (k, v)) in c.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{}: {}", k, v)?;
                    }
                    f.write_str("}")
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
