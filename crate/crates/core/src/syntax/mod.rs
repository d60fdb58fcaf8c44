//! Terms of the probabilistic λ-calculus: representation, surface syntax,
//! substitution and head-normal-form analysis.

mod classify;
mod parse;
mod print;
mod subst;
mod term;

pub use classify::{classify, hnf_view, is_hnf, HeadContext, HnfView, Redex, Shape};
pub use parse::{constant, parse};
pub use print::print;
pub use subst::{abstract_free, alpha_eq, close, free_vars, instantiate, open_with, shift, substitute_free};
pub use term::{Name, Node, Term, Var};
