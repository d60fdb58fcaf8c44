//! The labelled Markov chain whose states are closed terms and
//! distinguished head normal forms `νx.H`.

use std::collections::BTreeMap;
use std::fmt;

use crate::bigstep::BigStep;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::syntax::{instantiate, Node, Term};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkovState {
    /// A closed term.
    Term(Term),
    /// `νx.H`, stored as the body `H` whose binder index 0 is `x`.
    Hnf(Term),
}

impl MarkovState {
    pub fn is_term(&self) -> bool {
        matches!(self, MarkovState::Term(_))
    }
}

impl fmt::Display for MarkovState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovState::Term(t) => write!(f, "{t}"),
            MarkovState::Hnf(h) => {
                let s = Term::lam(h.clone()).to_string();
                write!(f, "ν{}", s.strip_prefix('\\').unwrap_or(&s))
            }
        }
    }
}

impl fmt::Debug for MarkovState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TransitionLabel {
    Tau,
    Apply(Term),
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Tau => f.write_str("τ"),
            TransitionLabel::Apply(t) => write!(f, "{t}"),
        }
    }
}

pub type StateDistr = BTreeMap<MarkovState, Dyadic>;

/// Outgoing transition probabilities for one label. For `τ` out of a term
/// these are the fuel-bounded lower bounds of its semantics.
pub fn transitions(s: &MarkovState, label: &TransitionLabel, eval: &mut BigStep, fuel: u32) -> Result<StateDistr> {
    let mut out = StateDistr::new();
    match (s, label) {
        (MarkovState::Term(m), TransitionLabel::Tau) => {
            for (h, w) in eval.eval(m, fuel)?.iter() {
                // closed hnfs are abstractions
                if let Node::Lam(body) = h.node() {
                    out.insert(MarkovState::Hnf(body.clone()), w.clone());
                }
            }
        }
        (MarkovState::Hnf(h), TransitionLabel::Apply(n)) => {
            out.insert(MarkovState::Term(instantiate(h, n)), Dyadic::one());
        }
        _ => {}
    }
    Ok(out)
}
