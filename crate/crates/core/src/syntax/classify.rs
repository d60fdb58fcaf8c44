//! Head normal forms and head-context decomposition.

use super::term::{Node, Term, Var};

/// `λx₁…xₙ. y M₁…Mₘ`. The head is addressed relative to the inside of
/// all `n` binders: `Bound(k)` with `k < n` is the binder `x_{n-k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfView {
    pub binders: usize,
    pub head: Var,
    pub args: Vec<Term>,
}

impl HnfView {
    pub fn to_term(&self) -> Term {
        Term::lams(self.binders, Term::apps(Term::var(self.head.clone()), self.args.iter().cloned()))
    }

    /// 1-based position of the head among this hnf's own binders, when it is one of them.
    pub fn head_position(&self) -> Option<usize> {
        match self.head {
            Var::Bound(k) if (k as usize) < self.binders => Some(self.binders - k as usize),
            _ => None,
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.binders == 0
    }
}

/// The context `λx₁…xₙ.[·] L₁…Lₘ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadContext {
    pub binders: usize,
    pub spine_args: Vec<Term>,
}

impl HeadContext {
    pub fn plug(&self, t: Term) -> Term {
        Term::lams(self.binders, Term::apps(t, self.spine_args.iter().cloned()))
    }
}

/// The redex sitting in the hole of a head context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redex {
    /// `(λy.body) arg`
    Beta { body: Term, arg: Term },
    /// `left ⊕ right`
    Choice { left: Term, right: Term },
}

impl Redex {
    pub fn to_term(&self) -> Term {
        match self {
            Redex::Beta { body, arg } => Term::app(Term::lam(body.clone()), arg.clone()),
            Redex::Choice { left, right } => Term::choice(left.clone(), right.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Hnf(HnfView),
    Redex(HeadContext, Redex),
}

/// Every term is either a head normal form or a head context around a
/// unique β- or ⊕-redex.
pub fn classify(t: &Term) -> Shape {
    let (binders, body) = t.peel_lams();
    let (head, mut args) = body.unwind_apps();
    match head.node() {
        Node::Var(v) => Shape::Hnf(HnfView { binders, head: v.clone(), args }),
        Node::Lam(b) => {
            // args is non-empty: otherwise the λ would have been peeled
            let arg = args.remove(0);
            Shape::Redex(HeadContext { binders, spine_args: args }, Redex::Beta { body: b.clone(), arg })
        }
        Node::Choice(l, r) => {
            Shape::Redex(HeadContext { binders, spine_args: args }, Redex::Choice { left: l.clone(), right: r.clone() })
        }
        Node::App(..) => unreachable!("unwind_apps stops at a non-application"),
    }
}

pub fn is_hnf(t: &Term) -> bool {
    let (_, body) = t.peel_lams();
    matches!(body.unwind_apps().0.node(), Node::Var(_))
}

pub fn hnf_view(t: &Term) -> Option<HnfView> {
    match classify(t) {
        Shape::Hnf(h) => Some(h),
        Shape::Redex(..) => None,
    }
}
