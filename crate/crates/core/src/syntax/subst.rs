//! Index shifting and capture-free substitution on nameless terms.

use std::collections::BTreeSet;

use super::term::{Name, Node, Term, Var};

/// Adds `d` to every binder index `>= cutoff`.
pub fn shift(t: &Term, d: u32, cutoff: u32) -> Term {
    if d == 0 || t.loose() <= cutoff {
        return t.clone();
    }
    match t.node() {
        Node::Var(Var::Bound(i)) => Term::bound(i + d),
        Node::Var(Var::Free(_)) => t.clone(),
        Node::Lam(b) => Term::lam(shift(b, d, cutoff + 1)),
        Node::App(a, b) => Term::app(shift(a, d, cutoff), shift(b, d, cutoff)),
        Node::Choice(a, b) => Term::choice(shift(a, d, cutoff), shift(b, d, cutoff)),
    }
}

/// `body[arg/x]` where `x` is binder index 0 of `body`: the binder is
/// consumed, so the remaining escaping indices drop by one.
pub fn instantiate(body: &Term, arg: &Term) -> Term {
    inst(body, arg, 0)
}

fn inst(t: &Term, arg: &Term, depth: u32) -> Term {
    if t.loose() <= depth {
        return t.clone();
    }
    match t.node() {
        Node::Var(Var::Bound(i)) => {
            if *i == depth {
                shift(arg, depth, 0)
            } else {
                // i > depth, since loose > depth
                Term::bound(i - 1)
            }
        }
        Node::Var(Var::Free(_)) => t.clone(),
        Node::Lam(b) => Term::lam(inst(b, arg, depth + 1)),
        Node::App(a, b) => Term::app(inst(a, arg, depth), inst(b, arg, depth)),
        Node::Choice(a, b) => Term::choice(inst(a, arg, depth), inst(b, arg, depth)),
    }
}

/// Replaces every occurrence of the free name `name` by `arg`.
pub fn substitute_free(t: &Term, name: &str, arg: &Term) -> Term {
    subst_free(t, name, arg, 0)
}

fn subst_free(t: &Term, name: &str, arg: &Term, depth: u32) -> Term {
    if !t.has_free_names() {
        return t.clone();
    }
    match t.node() {
        Node::Var(Var::Free(n)) if &**n == name => shift(arg, depth, 0),
        Node::Var(_) => t.clone(),
        Node::Lam(b) => Term::lam(subst_free(b, name, arg, depth + 1)),
        Node::App(a, b) => Term::app(subst_free(a, name, arg, depth), subst_free(b, name, arg, depth)),
        Node::Choice(a, b) => Term::choice(subst_free(a, name, arg, depth), subst_free(b, name, arg, depth)),
    }
}

/// Turns the free name `name` into the index of a new outermost binder.
/// The result is meant to be wrapped in `Term::lam`.
pub fn abstract_free(t: &Term, name: &str) -> Term {
    abs(t, name, 0)
}

fn abs(t: &Term, name: &str, depth: u32) -> Term {
    if !t.has_free_names() && t.loose() <= depth {
        return t.clone();
    }
    match t.node() {
        Node::Var(Var::Free(n)) if &**n == name => Term::bound(depth),
        Node::Var(Var::Bound(i)) if *i >= depth => Term::bound(i + 1),
        Node::Var(_) => t.clone(),
        Node::Lam(b) => Term::lam(abs(b, name, depth + 1)),
        Node::App(a, b) => Term::app(abs(a, name, depth), abs(b, name, depth)),
        Node::Choice(a, b) => Term::choice(abs(a, name, depth), abs(b, name, depth)),
    }
}

/// Replaces the escaping binder indices `0..names.len()` by free names;
/// `names[0]` stands for index 0 (the innermost binder).
pub fn open_with(t: &Term, names: &[Name]) -> Term {
    names.iter().fold(t.clone(), |acc, n| instantiate(&acc, &Term::free_name(n.clone())))
}

/// The free names of `t`.
pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        if !t.has_free_names() {
            continue;
        }
        match t.node() {
            Node::Var(Var::Free(n)) => {
                out.insert(n.clone());
            }
            Node::Var(_) => {}
            Node::Lam(b) => stack.push(b),
            Node::App(a, b) | Node::Choice(a, b) => {
                stack.push(a);
                stack.push(b);
            }
        }
    }
    out
}

/// λ-closes `t` over its free names in lexicographic order, the first
/// name becoming the outermost binder.
pub fn close(t: &Term) -> Term {
    let names: Vec<Name> = free_vars(t).into_iter().collect();
    names.iter().rev().fold(t.clone(), |acc, n| Term::lam(abstract_free(&acc, n)))
}

/// α-equivalence. On the nameless representation this is structural equality.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    a == b
}
