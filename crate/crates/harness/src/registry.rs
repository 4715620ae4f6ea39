//! Built-in example templates, looked up by name from scenario files.

use rekanren_core::goal::{conde, conj, eq, fresh, is_pair, membero, not_pair, set, succo, tailo, Goal};
use rekanren_core::template::{el, on, on_goal, ordered_slot, slot};
use rekanren_core::term::{cons, list, nil, LVar, Term};
use rekanren_core::{imembero, HostEffect, Reaction};

pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
    /// Model used when a scenario gives none.
    pub model: fn() -> Term,
    pub template: fn(&LVar) -> Term,
}

/// Counter increments are a lookup table up to this value.
pub const COUNTER_LIMIT: u32 = 1000;

pub fn examples() -> &'static [Example] {
    &EXAMPLES
}

pub fn lookup(name: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.name == name)
}

static EXAMPLES: [Example; 8] = [
    Example { name: "counter", summary: "a number and an increment button", model: || Term::from(0), template: counter },
    Example {
        name: "paragraph",
        summary: "a paragraph whose text a button replaces",
        model: || Term::from("lorem ipsum"),
        template: paragraph,
    },
    Example { name: "ordered", summary: "two text nodes placed by an order variable", model: || Term::nil(), template: ordered },
    Example {
        name: "list-filter",
        summary: "items with done flags and an all/done/todo filter",
        model: || {
            let item = |t: &str, d: bool| Term::record([("text", Term::from(t)), ("done", Term::from(d))]);
            Term::record([
                ("items", list([item("lorem", false), item("ipsum", true), item("dolor", false)])),
                ("show", Term::from("all")),
            ])
        },
        template: list_filter,
    },
    Example {
        name: "treeview",
        summary: "nested lists rendered as nested ul/li",
        model: || list([Term::from("lorem"), list(["ipsum", "dolor"]), Term::from("sit")]),
        template: treeview_template,
    },
    Example {
        name: "membero-list",
        summary: "a cons list rendered with membero",
        model: || list(["lorem", "ipsum", "dolor"]),
        template: membero_list,
    },
    Example {
        name: "imembero-list",
        summary: "an insertion list rendered with imembero",
        model: || cons(cons("lorem", "ipsum"), "dolor"),
        template: imembero_list,
    },
    Example {
        name: "todomvc",
        summary: "TodoMVC without the item counter",
        model: || Term::record([("todos", Term::nil()), ("active", Term::from(true)), ("completed", Term::from(true))]),
        template: todomvc,
    },
];

fn v(x: &LVar) -> Term {
    Term::Var(x.clone())
}

fn s(x: &str) -> Term {
    Term::from(x)
}

fn counter(m: &LVar) -> Term {
    let m = m.clone();
    let inc = {
        let m = m.clone();
        fresh(move |[n]| conj([succo(v(&m), &n, COUNTER_LIMIT), set(&m, &n)]))
    };
    el(
        "div",
        [],
        [el("p", [("id", s("count"))], [v(&m)]), el("button", [("id", s("increment")), ("onclick", on_goal(inc))], [s("+")])],
    )
}

fn paragraph(m: &LVar) -> Term {
    el(
        "div",
        [],
        [el("p", [("id", s("text"))], [v(m)]), el("button", [("onclick", on_goal(set(m, "dolor sit amet")))], [s("next")])],
    )
}

fn ordered(_m: &LVar) -> Term {
    el(
        "div",
        [],
        [ordered_slot(|view, order| {
            conde([conj([eq(&view, "ipsum"), eq(&order, 2)]), conj([eq(&view, "lorem"), eq(&order, 1)])])
        })],
    )
}

fn toggle(d: &LVar) -> Goal {
    conde([conj([eq(d, true), set(d, false)]), conj([eq(d, false), set(d, true)])])
}

fn list_filter(m: &LVar) -> Term {
    let mv = v(m);
    let show_button = |label: &'static str| {
        let mv = mv.clone();
        el(
            "button",
            [
                ("id", s(label)),
                (
                    "onclick",
                    on_goal(fresh(move |[sh]| conj([eq(mv.clone(), Term::record([("show", v(&sh))])), set(&sh, label)]))),
                ),
            ],
            [s(label)],
        )
    };
    let rows = {
        let mv = mv.clone();
        slot(move |view| {
            let mv = mv.clone();
            fresh(move |[items, sh, x, text, done]| {
                conj([
                    eq(mv.clone(), Term::record([("items", v(&items)), ("show", v(&sh))])),
                    membero(&items, &x),
                    eq(&x, Term::record([("text", v(&text)), ("done", v(&done))])),
                    conde([eq(&sh, "all"), conj([eq(&sh, "done"), eq(&done, true)]), conj([eq(&sh, "todo"), eq(&done, false)])]),
                    eq(
                        &view,
                        el(
                            "li",
                            [],
                            [
                                el(
                                    "input",
                                    [("type", s("checkbox")), ("checked", v(&done)), ("onclick", on_goal(toggle(&done)))],
                                    [],
                                ),
                                v(&text),
                            ],
                        ),
                    ),
                ])
            })
        })
    };
    el("div", [], [show_button("all"), show_button("done"), show_button("todo"), el("ul", [], [rows])])
}

/// View for a nested list: strings become `li`, sublists nested `ul`s.
pub fn treeview(view: &LVar, model: &Term) -> Goal {
    let model2 = model.clone();
    let sub = slot(move |subview| {
        let model = model2.clone();
        fresh(move |[submodel]| conj([membero(model.clone(), &submodel), treeview(&subview, &v(&submodel))]))
    });
    conde([
        conj([not_pair(model.clone()), eq(view, el("li", [], [model.clone()]))]),
        conj([is_pair(model.clone()), eq(view, el("li", [], [el("ul", [], [sub])]))]),
    ])
}

fn treeview_template(m: &LVar) -> Term {
    let m = m.clone();
    el("ul", [], [slot(move |view| treeview(&view, &v(&m)))])
}

fn prepend_on_enter(m: &LVar) -> Term {
    let m = m.clone();
    on(move |e, title| {
        if !e.is_key("Enter") {
            return Reaction::none();
        }
        Reaction::goal(set(&m, cons(&title, &m))).with_effect(HostEffect::ClearValue)
    })
}

/// Drops every `"lorem"` from the list at `model`.
pub fn remove_lorem(model: Term) -> Goal {
    fresh(move |[cdr, tail]| conj([eq(&tail, cons("lorem", &cdr)), tailo(model.clone(), &tail), set(&tail, &cdr)]))
}

fn membero_list(m: &LVar) -> Term {
    let mv = v(m);
    let rows = {
        let mv = mv.clone();
        slot(move |view| {
            let mv = mv.clone();
            fresh(move |[x]| conj([membero(mv.clone(), &x), eq(&view, el("li", [], [v(&x)]))]))
        })
    };
    el(
        "div",
        [],
        [
            el("input", [("className", s("new")), ("onkeydown", prepend_on_enter(m))], []),
            el("ul", [], [rows]),
            el("button", [("id", s("remove-lorem")), ("onclick", on_goal(remove_lorem(mv)))], [s("remove lorem")]),
        ],
    )
}

/// Relates an insertion list to its leftmost leaf.
pub fn leftmosto(xs: Term, leaf: Term) -> Goal {
    let (xs2, leaf2) = (xs.clone(), leaf.clone());
    conde([
        conj([not_pair(xs.clone()), eq(xs, leaf)]),
        fresh(move |[a, d]| conj([eq(xs2.clone(), cons(&a, &d)), leftmosto(v(&a), leaf2.clone())])),
    ])
}

fn imembero_list(m: &LVar) -> Term {
    let mv = v(m);
    let prepend = {
        let mv = mv.clone();
        on(move |e, title| {
            if !e.is_key("Enter") {
                return Reaction::none();
            }
            let mv = mv.clone();
            Reaction::goal(fresh(move |[leaf]| conj([leftmosto(mv.clone(), v(&leaf)), set(&leaf, cons(&title, &leaf))])))
                .with_effect(HostEffect::ClearValue)
        })
    };
    let rows = slot(move |view| {
        let mv = mv.clone();
        fresh(move |[x]| {
            let before = {
                let x = x.clone();
                on(move |_, t| Reaction::goal(set(&x, cons(&t, &x))))
            };
            conj([
                imembero(mv.clone(), &x),
                eq(&view, el("li", [], [v(&x), el("button", [("className", s("before")), ("onclick", before)], [s("+")])])),
            ])
        })
    });
    el("div", [], [el("input", [("className", s("new")), ("onkeydown", prepend)], []), el("ul", [], [rows])])
}

fn filter_link(m: &Term, class: Option<&str>, href: &str, active: bool, completed: bool, label: &str) -> Term {
    let m = m.clone();
    let pick = fresh(move |[a, c]| {
        conj([eq(m.clone(), Term::record([("active", v(&a)), ("completed", v(&c))])), set(&a, active), set(&c, completed)])
    });
    let mut props = vec![("href", s(href)), ("onclick", on_goal(pick))];
    if let Some(c) = class {
        props.push(("className", s(c)));
    }
    el("li", [], [el("a", props, [s(label)])])
}

pub fn todomvc(m: &LVar) -> Term {
    let mv = v(m);
    let add = {
        let mv = mv.clone();
        on(move |e, title| {
            if !e.is_key("Enter") {
                return Reaction::none();
            }
            let mv = mv.clone();
            let todo = Term::record([("title", v(&title)), ("done", Term::from(false)), ("editing", Term::from(false))]);
            Reaction::goal(fresh(move |[todos, x]| {
                conj([
                    eq(mv.clone(), Term::record([("todos", v(&todos))])),
                    eq(&x, nil()),
                    tailo(&todos, &x),
                    set(&x, list([todo.clone()])),
                ])
            }))
            .with_effect(HostEffect::ClearValue)
        })
    };
    let clear = {
        let mv = mv.clone();
        fresh(move |[todos, item, rest]| {
            conj([
                eq(mv.clone(), Term::record([("todos", v(&todos))])),
                tailo(&todos, &item),
                eq(&item, cons(Term::record([("done", true)]), &rest)),
                set(&item, &rest),
            ])
        })
    };
    el(
        "section",
        [("className", s("todoapp"))],
        [
            el(
                "header",
                [("className", s("header"))],
                [
                    Term::indexed([s("h1"), s("todos")]),
                    el(
                        "input",
                        [
                            ("className", s("new-todo")),
                            ("placeholder", s("What needs to be done?")),
                            ("autofocus", Term::from(true)),
                            ("onkeydown", add),
                        ],
                        [],
                    ),
                ],
            ),
            el(
                "section",
                [("className", s("main"))],
                [
                    el("input", [("id", s("toggle-all")), ("className", s("toggle-all")), ("type", s("checkbox"))], []),
                    el("label", [("for", s("toggle-all"))], [s("Mark all as complete")]),
                    items_template(&mv),
                ],
            ),
            el(
                "footer",
                [("className", s("footer"))],
                [
                    el(
                        "ul",
                        [("className", s("filters"))],
                        [
                            filter_link(&mv, Some("selected"), "#/", true, true, "All"),
                            filter_link(&mv, None, "#/active", true, false, "Active"),
                            filter_link(&mv, None, "#/completed", false, true, "Completed"),
                        ],
                    ),
                    el("button", [("className", s("clear-completed")), ("onclick", on_goal(clear))], [s("Clear completed")]),
                ],
            ),
        ],
    )
}

/// The two slots inside one `li`: the normal row and the editor.
fn todo_view(done: &LVar, title: &LVar, editing: &LVar, item: &LVar, rest: &LVar) -> (Term, Term) {
    let (title, editing) = (title.clone(), editing.clone());
    let shown = {
        let (done, title, editing, item, rest) = (done.clone(), title.clone(), editing.clone(), item.clone(), rest.clone());
        slot(move |view| {
            let start_edit = {
                let editing = editing.clone();
                on(move |_, _| Reaction::goal(set(&editing, true)))
            };
            let check = {
                let done = done.clone();
                on(move |e, _| match e.checked {
                    Some(c) => Reaction::goal(set(&done, c)),
                    None => {
                        log::warn!("input event without a checked state; ignored");
                        Reaction::none()
                    }
                })
            };
            conj([
                eq(&editing, false),
                eq(
                    &view,
                    el(
                        "div",
                        [("className", s("view")), ("ondblclick", start_edit)],
                        [
                            el(
                                "input",
                                [
                                    ("id", s("check")),
                                    ("className", s("toggle")),
                                    ("type", s("checkbox")),
                                    ("checked", v(&done)),
                                    ("oninput", check),
                                ],
                                [],
                            ),
                            Term::indexed([s("label"), v(&title)]),
                            el("button", [("className", s("destroy")), ("onclick", on_goal(set(&item, &rest)))], []),
                        ],
                    ),
                ),
            ])
        })
    };
    let editor = slot(move |view| {
        let blur_on_enter =
            on(|e, _| if e.is_key("Enter") { Reaction::none().with_effect(HostEffect::Blur) } else { Reaction::none() });
        let commit = {
            let (editing, title) = (editing.clone(), title.clone());
            on(move |_, t| Reaction::goal(conj([set(&editing, false), set(&title, &t)])))
        };
        conj([
            eq(&editing, true),
            eq(
                &view,
                el(
                    "input",
                    [("className", s("edit")), ("value", v(&title)), ("onkeydown", blur_on_enter), ("onblur", commit)],
                    [],
                ),
            ),
        ])
    });
    (shown, editor)
}

fn items_template(m: &Term) -> Term {
    let m = m.clone();
    el(
        "ul",
        [("className", s("todo-list"))],
        [slot(move |view| {
            let m = m.clone();
            fresh(move |[todos, todo, item, rest, title, done, editing, strikethru, active, completed]| {
                let (shown, editor) = todo_view(&done, &title, &editing, &item, &rest);
                conj([
                    eq(m.clone(), Term::record([("todos", v(&todos)), ("active", v(&active)), ("completed", v(&completed))])),
                    tailo(&todos, &item),
                    eq(&item, cons(&todo, &rest)),
                    eq(&todo, Term::record([("title", v(&title)), ("done", v(&done)), ("editing", v(&editing))])),
                    conde([
                        conj([eq(&done, true), eq(&completed, true), eq(&strikethru, "completed")]),
                        conj([eq(&done, false), eq(&active, true), eq(&strikethru, "")]),
                    ]),
                    eq(&view, el("li", [("className", v(&strikethru))], [shown, editor])),
                ])
            })
        })],
    )
}
