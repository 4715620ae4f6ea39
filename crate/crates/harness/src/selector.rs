//! Node selectors for scenario events.
//!
//! A selector is either `path:i/j/...` (child indices from the roots) or
//! whitespace-separated descendant steps. Each step is an optional tag
//! followed by any of `#id`, `.class`, `[attr]`, `[attr=value]` and
//! `:text(content)`, where `content` must equal the node's whole text.
//! Values may be double-quoted. A selector must match exactly one node.

use rekanren_core::dom::{DomNode, DomTree};
use rekanren_core::template::NodeId;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SelectorError {
    #[error("selector {selector:?}, column {column}: {message}")]
    Parse { selector: String, column: usize, message: String },
    #[error("selector {0:?} matches no node")]
    NoMatch(String),
    #[error("selector {0:?} matches {1} nodes")]
    Ambiguous(String, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Test {
    Tag(String),
    Id(String),
    Class(String),
    Attr(String, Option<String>),
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    Path(Vec<usize>),
    Steps(Vec<Vec<Test>>),
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, SelectorError> {
        Err(SelectorError::Parse { selector: self.src.to_string(), column: self.pos + 1, message: message.into() })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, SelectorError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '-' || c == '_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a name");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// Quoted string, or raw text up to `end`.
    fn value(&mut self, end: char) -> Result<String, SelectorError> {
        if self.peek() == Some('"') {
            self.pos += 1;
            let mut out = String::new();
            loop {
                match self.peek() {
                    None => return self.err("unterminated string"),
                    Some('"') => {
                        self.pos += 1;
                        return Ok(out);
                    }
                    Some('\\') if self.chars.get(self.pos + 1).is_some() => {
                        out.push(self.chars[self.pos + 1]);
                        self.pos += 2;
                    }
                    Some(c) => {
                        out.push(c);
                        self.pos += 1;
                    }
                }
            }
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c != end) {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn expect(&mut self, c: char) -> Result<(), SelectorError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {:?}", c))
        }
    }

    fn step(&mut self) -> Result<Vec<Test>, SelectorError> {
        let mut tests = Vec::new();
        if matches!(self.peek(), Some(c) if c.is_alphanumeric()) {
            tests.push(Test::Tag(self.ident()?));
        }
        loop {
            match self.peek() {
                Some('#') => {
                    self.pos += 1;
                    tests.push(Test::Id(self.ident()?));
                }
                Some('.') => {
                    self.pos += 1;
                    tests.push(Test::Class(self.ident()?));
                }
                Some('[') => {
                    self.pos += 1;
                    let name = self.ident()?;
                    let value = if self.peek() == Some('=') {
                        self.pos += 1;
                        Some(self.value(']')?)
                    } else {
                        None
                    };
                    self.expect(']')?;
                    tests.push(Test::Attr(name, value));
                }
                Some(':') => {
                    self.pos += 1;
                    let at = self.pos;
                    let name = self.ident()?;
                    if name != "text" {
                        self.pos = at;
                        return self.err(format!("unknown pseudo-class :{}", name));
                    }
                    self.expect('(')?;
                    let t = self.value(')')?;
                    self.expect(')')?;
                    tests.push(Test::Text(t));
                }
                _ => break,
            }
        }
        if tests.is_empty() {
            return self.err("expected a selector step");
        }
        Ok(tests)
    }
}

pub fn parse(src: &str) -> Result<Selector, SelectorError> {
    if let Some(rest) = src.strip_prefix("path:") {
        let mut out = Vec::new();
        for (i, part) in rest.split('/').enumerate() {
            match part.parse() {
                Ok(n) => out.push(n),
                Err(_) => {
                    let column = 6 + rest.split('/').take(i).map(|p| p.len() + 1).sum::<usize>();
                    return Err(SelectorError::Parse {
                        selector: src.to_string(),
                        column,
                        message: format!("{:?} is not a child index", part),
                    });
                }
            }
        }
        return Ok(Selector::Path(out));
    }
    let mut p = Parser { src, chars: src.chars().collect(), pos: 0 };
    let mut steps = Vec::new();
    loop {
        while matches!(p.peek(), Some(c) if c.is_whitespace()) {
            p.pos += 1;
        }
        if p.peek().is_none() {
            break;
        }
        steps.push(p.step()?);
        if matches!(p.peek(), Some(c) if !c.is_whitespace()) {
            return p.err("unexpected character");
        }
    }
    if steps.is_empty() {
        return p.err("empty selector");
    }
    Ok(Selector::Steps(steps))
}

fn matches(dom: &DomTree, node: &DomNode, tests: &[Test]) -> bool {
    tests.iter().all(|t| match t {
        Test::Tag(tag) => node.tag() == Some(tag.as_str()),
        Test::Id(id) => node.attr("id").map(|a| a.display()) == Some(id.clone()),
        Test::Class(c) => node.has_class(c),
        Test::Attr(name, None) => node.attr(name).is_some(),
        Test::Attr(name, Some(v)) => node.attr(name).map(|a| a.display()).as_ref() == Some(v),
        Test::Text(t) => node.tag().is_some() && dom.text_content(node.id) == *t,
    })
}

fn matches_steps(dom: &DomTree, id: NodeId, steps: &[Vec<Test>]) -> bool {
    let (last, earlier) = steps.split_last().expect("non-empty");
    if !matches(dom, dom.get(id).unwrap(), last) {
        return false;
    }
    // greedy match of the earlier steps against the nearest ancestors
    let mut remaining = earlier;
    let mut cur = dom.get(id).unwrap().parent;
    while let (Some(p), Some((step, rest))) = (cur, remaining.split_last()) {
        if matches(dom, dom.get(p).unwrap(), step) {
            remaining = rest;
        }
        cur = dom.get(p).unwrap().parent;
    }
    remaining.is_empty()
}

pub fn select_all(dom: &DomTree, sel: &Selector) -> Vec<NodeId> {
    match sel {
        Selector::Path(path) => {
            let mut level = dom.roots();
            let mut found = None;
            for i in path {
                match level.get(*i) {
                    Some(id) => {
                        found = Some(*id);
                        level = dom.get(*id).unwrap().children();
                    }
                    None => return vec![],
                }
            }
            found.into_iter().collect()
        }
        Selector::Steps(steps) => dom.find_all(|n| matches_steps(dom, n.id, steps)),
    }
}

/// The unique node matching `src`.
pub fn select(dom: &DomTree, src: &str) -> Result<NodeId, SelectorError> {
    let sel = parse(src)?;
    match select_all(dom, &sel)[..] {
        [id] => Ok(id),
        [] => Err(SelectorError::NoMatch(src.to_string())),
        ref many => Err(SelectorError::Ambiguous(src.to_string(), many.len())),
    }
}
