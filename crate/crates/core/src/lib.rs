//! Relational reactive state and views on top of a small miniKanren.
//!
//! All application state lives in one persistent [`Substitution`] in
//! normal form. Updates are goals containing `set` (reactive unification);
//! a step runs the goal, turns every collected `set` into a patch read
//! entirely from the current state, and applies it. Views are templates
//! whose dynamic parts are goals, kept as persistent search trees so that
//! each answer keeps its identity across steps.

#![no_std]

extern crate alloc;

pub mod dom;
pub mod goal;
pub mod insertion;
pub mod reactive;
pub mod search;
pub mod subst;
pub mod template;
pub mod term;
pub mod view_tree;

pub use goal::{conde, conj, eq, fail, fresh, is_pair, membero, not_pair, set, succeed, succo, tailo, Goal};
pub use insertion::{from_flat, imembero, insert_before};
pub use reactive::{apply_patch, build_patch, check_normal_form, normalize, Patch, ReactiveSystem, UpdateError};
pub use search::{run_all, Answer, SearchConfig, SearchError};
pub use subst::Substitution;
pub use template::{dispatch_event, mount, EventPayload, HostEffect, Reaction, RenderOp, ViewInstance};
pub use term::{cons, list, nil, Atom, Handler, Key, LVar, Term};
pub use view_tree::{Transition, ViewTree};
