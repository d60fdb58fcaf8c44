use std::collections::BTreeSet;

use super::subst::free_vars;
use super::term::{Name, Node, Term, Var};

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    ChoiceLeft,
    Fun,
    Arg,
}

struct Printer {
    avoid: BTreeSet<Name>,
    env: Vec<String>,
    out: String,
}

const BASE: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

impl Printer {
    fn fresh(&self) -> String {
        for round in 0.. {
            for b in BASE {
                let cand = if round == 0 { b.to_string() } else { format!("{b}{round}") };
                if !self.avoid.contains(cand.as_str()) && !self.env.contains(&cand) {
                    return cand;
                }
            }
        }
        unreachable!()
    }

    fn term(&mut self, t: &Term, ctx: Ctx) {
        match t.node() {
            Node::Var(Var::Free(n)) => self.out.push_str(n),
            Node::Var(Var::Bound(k)) => {
                let k = *k as usize;
                if k < self.env.len() {
                    let name = self.env[self.env.len() - 1 - k].clone();
                    self.out.push_str(&name);
                } else {
                    // dangling index: only printed for diagnostics
                    self.out.push_str(&format!("#{}", k - self.env.len()));
                }
            }
            Node::Lam(_) => {
                let paren = ctx != Ctx::Top;
                if paren {
                    self.out.push('(');
                }
                let (n, body) = t.peel_lams();
                self.out.push('\\');
                for i in 0..n {
                    let name = self.fresh();
                    if i > 0 {
                        self.out.push(' ');
                    }
                    self.out.push_str(&name);
                    self.env.push(name);
                }
                self.out.push('.');
                self.term(body, Ctx::Top);
                self.env.truncate(self.env.len() - n);
                if paren {
                    self.out.push(')');
                }
            }
            Node::App(f, a) => {
                let paren = ctx == Ctx::Arg;
                if paren {
                    self.out.push('(');
                }
                self.term(f, Ctx::Fun);
                self.out.push(' ');
                self.term(a, Ctx::Arg);
                if paren {
                    self.out.push(')');
                }
            }
            Node::Choice(l, r) => {
                let paren = ctx != Ctx::Top;
                if paren {
                    self.out.push('(');
                }
                self.term(l, Ctx::ChoiceLeft);
                self.out.push_str(" (+) ");
                self.term(r, Ctx::Top);
                if paren {
                    self.out.push(')');
                }
            }
        }
    }
}

/// Renders a term in ASCII surface syntax with minimal parentheses.
/// Binder names are drawn from `x y z u v w x1 …`, skipping free names and
/// names of enclosing binders, so the output re-parses to an α-equivalent term.
pub fn print(t: &Term) -> String {
    let mut p = Printer { avoid: free_vars(t), env: Vec::new(), out: String::new() };
    p.term(t, Ctx::Top);
    p.out
}
