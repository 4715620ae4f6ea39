//! Scenario files: a registered template, an initial model, a list of
//! events and expectations about what the display looks like after them.
//!
//! ```json
//! {
//!   "template": "counter",
//!   "model": 0,
//!   "events": [{"selector": "#increment", "event": "click"}],
//!   "expectations": [{"after": 1, "snapshot_file": "golden/counter/1.json", "max_ops": 1}]
//! }
//! ```
//!
//! `after` counts events: 0 is the initial mount. Snapshot paths are
//! relative to the scenario file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rekanren_core::dom::DomTree;
use rekanren_core::template::{NodeId, ViewInstance};
use rekanren_core::term::Term;
use rekanren_core::{dispatch_event, mount, ReactiveSystem, RenderOp};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::json::{json_to_term, term_to_json};
use crate::registry;
use crate::selector;
use crate::wire::{dump_to_json, op_line, PayloadJson};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(alias = "template_name")]
    pub template: String,
    #[serde(default, alias = "initial_model", skip_serializing_if = "Option::is_none")]
    pub model: Option<Value>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub selector: String,
    pub event: String,
    #[serde(default)]
    pub payload: PayloadJson,
    /// The update is expected to be rejected, leaving the state unchanged.
    #[serde(default)]
    pub expect_error: bool,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(alias = "after_event_index")]
    pub after: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ops: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_ops: Option<usize>,
    /// Exact count per op name, e.g. `{"remove_node": 1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ops: Option<BTreeMap<String, usize>>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub check_oracle: bool,
    pub snapshot_every_step: bool,
    pub dump_tree: bool,
    /// Write snapshot files instead of comparing against them.
    pub bless: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: unknown template {name:?} (known: {known})")]
    UnknownTemplate { path: PathBuf, name: String, known: String },
    #[error("{path}: initial mount failed: {message}")]
    Mount { path: PathBuf, message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    pub ops: usize,
    pub op_counts: BTreeMap<String, usize>,
    pub generation: u64,
    pub normal_form: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trees: Option<Vec<Value>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub path: String,
    pub template: String,
    pub steps: Vec<StepReport>,
    pub expectations_checked: usize,
    pub failures: Vec<String>,
    pub final_model: Value,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} (template {})\n", self.path, self.template);
        for s in &self.steps {
            let what = s.event.clone().unwrap_or_else(|| "mount".into());
            let mut line = format!("  step {:>2}  {:<40} ops {:>3}  gen {:>2}", s.index, what, s.ops, s.generation);
            if !s.normal_form {
                line.push_str("  NOT NORMAL");
            }
            match s.oracle {
                Some(true) => line.push_str("  oracle ok"),
                Some(false) => line.push_str("  ORACLE MISMATCH"),
                None => {}
            }
            if let Some(e) = &s.error {
                line.push_str(&format!("  error: {}", e));
            }
            out.push_str(&line);
            out.push('\n');
        }
        for f in &self.failures {
            out.push_str(&format!("  FAIL {}\n", f));
        }
        let events = self.steps.len().saturating_sub(1);
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{} {} events, {} expectations\n", verdict, events, self.expectations_checked));
        out
    }
}

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<Scenario, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Loads and runs a scenario file. `op_log`, when given, receives every
/// op as one JSON line, flushed after each event.
pub fn run_file(path: &Path, opts: &RunOptions, op_log: Option<&mut dyn Write>) -> Result<ScenarioReport, ScenarioError> {
    let scn = load(path)?;
    run(&scn, path, opts, op_log)
}

fn count_ops(ops: &[RenderOp]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for op in ops {
        *m.entry(op.name().to_string()).or_insert(0) += 1;
    }
    m
}

fn snap_json(t: &Term) -> Value {
    term_to_json(t).unwrap_or_else(|e| json!({ "unserializable": e.to_string() }))
}

/// First place where two JSON values differ, as a path.
pub fn first_difference(a: &Value, b: &Value) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for k in x.keys().chain(y.keys()) {
                match (x.get(k), y.get(k)) {
                    (Some(p), Some(q)) => {
                        if let Some(d) = first_difference(p, q) {
                            return Some(format!(".{}{}", k, d));
                        }
                    }
                    _ => return Some(format!(".{} (present on one side only)", k)),
                }
            }
            None
        }
        (Value::Array(x), Value::Array(y)) => {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                if let Some(d) = first_difference(p, q) {
                    return Some(format!("[{}]{}", i, d));
                }
            }
            if x.len() != y.len() {
                return Some(format!(" (length {} vs {})", x.len(), y.len()));
            }
            None
        }
        _ if a == b => None,
        _ => Some(format!(": {} vs {}", a, b)),
    }
}

struct Run<'a> {
    scn: &'a Scenario,
    path: &'a Path,
    opts: &'a RunOptions,
    tpl: Term,
    failures: Vec<String>,
    checked: usize,
}

impl Run<'_> {
    fn check_step(
        &mut self,
        index: usize,
        sys: &ReactiveSystem,
        inst: &ViewInstance,
        dom: &DomTree,
        ops: &[RenderOp],
    ) -> StepReport {
        let snapshot = inst.snapshot();
        let snap = snap_json(&snapshot);
        let violations = sys.normal_form_violations();
        if !violations.is_empty() {
            self.failures.push(format!("step {}: state not in normal form: {:?}", index, violations));
        }
        let dom_snap = snap_json(&dom.snapshot());
        if dom_snap != snap {
            self.failures.push(format!(
                "step {}: applying the ops does not give the instance snapshot (at {})",
                index,
                first_difference(&dom_snap, &snap).unwrap_or_default()
            ));
        }
        let oracle = self.opts.check_oracle.then(|| match mount(sys, &self.tpl) {
            Ok((fresh, _)) => {
                let fresh = snap_json(&fresh.snapshot());
                let (a, b) = (fresh.to_string(), snap.to_string());
                let same = a == b;
                if !same {
                    self.failures.push(format!(
                        "step {}: incremental snapshot differs from a fresh mount (at {})",
                        index,
                        first_difference(&snap, &fresh).unwrap_or_default()
                    ));
                }
                same
            }
            Err(e) => {
                self.failures.push(format!("step {}: fresh mount failed: {}", index, e));
                false
            }
        });
        for (ei, exp) in self.scn.expectations.iter().enumerate().filter(|(_, e)| e.after == index) {
            self.checked += 1;
            self.check_expectation(ei, exp, sys, &snap, ops);
        }
        StepReport {
            index,
            event: None,
            node: None,
            ops: ops.len(),
            op_counts: count_ops(ops),
            generation: sys.generation(),
            normal_form: violations.is_empty(),
            oracle,
            error: None,
            snapshot: self.opts.snapshot_every_step.then(|| snap.clone()),
            trees: self.opts.dump_tree.then(|| inst.view_trees().iter().map(|t| dump_to_json(&t.dump())).collect()),
        }
    }

    fn check_expectation(&mut self, ei: usize, exp: &Expectation, sys: &ReactiveSystem, snap: &Value, ops: &[RenderOp]) {
        let at = format!("expectations[{}] (after {})", ei, exp.after);
        if let Some(want) = &exp.snapshot {
            if let Some(d) = first_difference(snap, want) {
                self.failures.push(format!("{}: snapshot differs at {}", at, d));
            }
        }
        if let Some(file) = &exp.snapshot_file {
            let p = self.path.parent().unwrap_or(Path::new(".")).join(file);
            if self.opts.bless {
                let text = serde_json::to_string_pretty(snap).expect("json prints") + "\n";
                if let Some(dir) = p.parent() {
                    let _ = std::fs::create_dir_all(dir);
                }
                if let Err(e) = std::fs::write(&p, text) {
                    self.failures.push(format!("{}: cannot write {}: {}", at, p.display(), e));
                }
            } else {
                match std::fs::read_to_string(&p)
                    .map_err(|e| e.to_string())
                    .and_then(|t| serde_json::from_str::<Value>(&t).map_err(|e| e.to_string()))
                {
                    Ok(want) => {
                        if let Some(d) = first_difference(snap, &want) {
                            self.failures.push(format!("{}: snapshot differs from {} at {}", at, file, d));
                        }
                    }
                    Err(e) => self.failures.push(format!("{}: cannot read {}: {}", at, p.display(), e)),
                }
            }
        }
        if let Some(want) = &exp.model {
            let got = sys.model().map(|m| snap_json(&m)).unwrap_or(Value::Null);
            if let Some(d) = first_difference(&got, want) {
                self.failures.push(format!("{}: model differs at {}", at, d));
            }
        }
        if let Some(max) = exp.max_ops {
            if ops.len() > max {
                self.failures.push(format!("{}: {} ops, expected at most {}", at, ops.len(), max));
            }
        }
        if let Some(min) = exp.min_ops {
            if ops.len() < min {
                self.failures.push(format!("{}: {} ops, expected at least {}", at, ops.len(), min));
            }
        }
        if let Some(want) = &exp.ops {
            let got = count_ops(ops);
            for (name, n) in want {
                let g = got.get(name).copied().unwrap_or(0);
                if g != *n {
                    self.failures.push(format!("{}: {} {} ops, expected {}", at, g, name, n));
                }
            }
        }
    }
}

fn emit(op_log: &mut Option<&mut dyn Write>, ops: &[RenderOp]) {
    if let Some(w) = op_log {
        for op in ops {
            let _ = writeln!(w, "{}", op_line(op));
        }
        let _ = w.flush();
    }
}

pub fn run(
    scn: &Scenario,
    path: &Path,
    opts: &RunOptions,
    op_log: Option<&mut dyn Write>,
) -> Result<ScenarioReport, ScenarioError> {
    Ok(run_inner(scn, path, opts, op_log)?.0)
}

/// Like [`run`], also returning the final state.
pub fn run_to_state(scn: &Scenario, path: &Path, opts: &RunOptions) -> Result<(ScenarioReport, ReactiveSystem), ScenarioError> {
    run_inner(scn, path, opts, None)
}

fn run_inner(
    scn: &Scenario,
    path: &Path,
    opts: &RunOptions,
    mut op_log: Option<&mut dyn Write>,
) -> Result<(ScenarioReport, ReactiveSystem), ScenarioError> {
    let example = registry::lookup(&scn.template).ok_or_else(|| ScenarioError::UnknownTemplate {
        path: path.into(),
        name: scn.template.clone(),
        known: registry::examples().iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
    })?;
    let model = scn.model.as_ref().map(json_to_term).unwrap_or_else(example.model);
    let mut sys = ReactiveSystem::new(&model).map_err(|e| ScenarioError::Mount { path: path.into(), message: e.to_string() })?;
    let tpl = (example.template)(&sys.model_root);
    let (mut inst, ops) = mount(&sys, &tpl).map_err(|e| ScenarioError::Mount { path: path.into(), message: e.to_string() })?;
    let mut dom = DomTree::new();
    let mut run = Run { scn, path, opts, tpl, failures: Vec::new(), checked: 0 };
    if let Err(e) = dom.apply_all(&ops) {
        run.failures.push(format!("step 0: ops do not apply: {}", e));
    }
    emit(&mut op_log, &ops);
    let mut steps = vec![run.check_step(0, &sys, &inst, &dom, &ops)];
    for (i, ev) in scn.events.iter().enumerate() {
        let index = i + 1;
        let what = format!("{} {:?}", ev.event, ev.selector);
        let node = match selector::select(&dom, &ev.selector) {
            Ok(n) => n,
            Err(e) => {
                run.failures.push(format!("events[{}]: {}", i, e));
                break;
            }
        };
        let payload = ev.payload.clone().into_payload(&ev.event);
        let (ops, error) = match dispatch_event(&sys, &mut inst, node, &payload) {
            Ok((next, ops)) => {
                sys = next;
                if ev.expect_error {
                    run.failures.push(format!("events[{}]: expected the update to be rejected", i));
                }
                (ops, None)
            }
            Err(e) => {
                if !ev.expect_error {
                    run.failures.push(format!("events[{}] ({}): {}", i, what, e));
                }
                (Vec::new(), Some(e.to_string()))
            }
        };
        if let Err(e) = dom.apply_all(&ops) {
            run.failures.push(format!("events[{}]: ops do not apply: {}", i, e));
        }
        emit(&mut op_log, &ops);
        let mut step = run.check_step(index, &sys, &inst, &dom, &ops);
        step.event = Some(what);
        step.node = Some(node);
        step.error = error;
        steps.push(step);
    }
    for exp in &scn.expectations {
        if exp.after > scn.events.len() {
            run.failures.push(format!("expectation after {} is past the last event", exp.after));
        }
    }
    let final_model = sys.model().map(|m| snap_json(&m)).unwrap_or(Value::Null);
    let report = ScenarioReport {
        path: path.display().to_string(),
        template: scn.template.clone(),
        steps,
        expectations_checked: run.checked,
        failures: run.failures,
        final_model,
    };
    Ok((report, sys))
}
