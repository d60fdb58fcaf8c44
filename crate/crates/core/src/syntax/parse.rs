//! Surface syntax:
//!
//! ```text
//! term   := app_or_lam ( ("(+)" | "⊕") term )?
//! app_or_lam := lam | atom+ lam?
//! lam    := ("\" | "λ") name+ "." term
//! atom   := name | "(" term ")"
//! ```
//!
//! Choice is right-associative and binds loosest; a λ body extends as far
//! right as possible. Names not bound by an enclosing λ resolve to the
//! built-in constants when they name one, and to free variables otherwise.

use std::sync::OnceLock;

use super::term::Term;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Choice,
    Ident(String),
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '\\' | 'λ' => {
                i += 1;
                Tok::Lambda
            }
            '.' => {
                i += 1;
                Tok::Dot
            }
            '⊕' => {
                i += 1;
                Tok::Choice
            }
            '(' if chars.get(i + 1) == Some(&'+') && chars.get(i + 2) == Some(&')') => {
                i += 3;
                Tok::Choice
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            'Δ' | 'Ω' | 'Θ' => {
                i += 1;
                Tok::Ident(c.to_string())
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            other => return Err(Error::Parse { pos: start, msg: format!("unexpected character `{other}`") }),
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, chars.len()));
    Ok(out)
}

/// The closed constant named `name`, if it is one of the built-ins
/// `I T F Delta Omega Theta hid` (or `Δ Ω Θ`).
pub fn constant(name: &str) -> Option<Term> {
    static TABLE: OnceLock<Vec<(&'static str, Term)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let v = Term::bound;
        let i = Term::lam(v(0));
        let t = Term::lams(2, v(1));
        let f = Term::lams(2, v(0));
        let delta = Term::lam(Term::app(v(0), v(0)));
        let omega = Term::app(delta.clone(), delta.clone());
        // λx.λy. y (x x y)
        let a = Term::lams(2, Term::app(v(0), Term::apps(v(1), [v(1), v(0)])));
        let theta = Term::app(a.clone(), a);
        let hid = Term::choice(omega.clone(), i.clone());
        vec![
            ("I", i),
            ("T", t),
            ("F", f),
            ("Delta", delta.clone()),
            ("Δ", delta),
            ("Omega", omega.clone()),
            ("Ω", omega),
            ("Theta", theta.clone()),
            ("Θ", theta),
            ("hid", hid),
        ]
    });
    table.iter().find(|(n, _)| *n == name).map(|(_, t)| t.clone())
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    scope: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn term(&mut self) -> Result<Term> {
        let left = if *self.peek() == Tok::Lambda { self.lam()? } else { self.app()? };
        if *self.peek() == Tok::Choice {
            self.bump();
            let right = self.term()?;
            return Ok(Term::choice(left, right));
        }
        Ok(left)
    }

    fn lam(&mut self) -> Result<Term> {
        self.bump();
        let mut names = Vec::new();
        while let Tok::Ident(n) = self.peek() {
            names.push(n.clone());
            self.bump();
        }
        if names.is_empty() {
            return self.err("expected a binder name after λ");
        }
        if *self.peek() != Tok::Dot {
            return self.err("expected `.` after binder names");
        }
        self.bump();
        let n = names.len();
        self.scope.extend(names);
        let body = self.term();
        self.scope.truncate(self.scope.len() - n);
        Ok(Term::lams(n, body?))
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::LParen)
    }

    fn app(&mut self) -> Result<Term> {
        if !self.starts_atom() {
            return match self.peek() {
                Tok::Eof => self.err("unexpected end of input"),
                t => {
                    let t = format!("{t:?}");
                    self.err(format!("expected a term, found {t}"))
                }
            };
        }
        let mut t = self.atom()?;
        loop {
            if self.starts_atom() {
                let a = self.atom()?;
                t = Term::app(t, a);
            } else if *self.peek() == Tok::Lambda {
                let a = self.lam()?;
                return Ok(Term::app(t, a));
            } else {
                return Ok(t);
            }
        }
    }

    fn atom(&mut self) -> Result<Term> {
        match self.bump() {
            Tok::Ident(n) => Ok(self.resolve(&n)),
            Tok::LParen => {
                let t = self.term()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(t)
            }
            _ => unreachable!("starts_atom checked"),
        }
    }

    fn resolve(&self, name: &str) -> Term {
        if let Some(k) = self.scope.iter().rev().position(|s| s == name) {
            return Term::bound(k as u32);
        }
        constant(name).unwrap_or_else(|| Term::free(name))
    }
}

/// Parses surface syntax into a term. Error positions are character offsets.
pub fn parse(text: &str) -> Result<Term> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, scope: Vec::new() };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}
