use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Name of a free variable.
pub type Name = Arc<str>;

/// A variable occurrence: either a binder index (0 = innermost enclosing
/// λ) or a global free name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Var {
    Bound(u32),
    Free(Name),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    Var(Var),
    Lam(Term),
    App(Term, Term),
    Choice(Term, Term),
}

struct Inner {
    node: Node,
    hash: u64,
    size: u32,
    // 1 + the largest binder index escaping this subterm, 0 if none
    loose: u32,
    has_free: bool,
}

/// An immutable, shared Λ⊕ term in nameless form.
///
/// Structural equality on this representation is α-equivalence. Hashes,
/// sizes and scoping facts are cached at construction so that equality
/// checks and shifts of closed subterms are cheap.
#[derive(Clone)]
pub struct Term(Arc<Inner>);

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Var(v) => {
            0u8.hash(&mut h);
            v.hash(&mut h);
        }
        Node::Lam(b) => {
            1u8.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
        Node::App(f, a) => {
            2u8.hash(&mut h);
            f.0.hash.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
        Node::Choice(l, r) => {
            3u8.hash(&mut h);
            l.0.hash.hash(&mut h);
            r.0.hash.hash(&mut h);
        }
    }
    h.finish()
}

impl Term {
    fn mk(node: Node) -> Term {
        let (size, loose, has_free) = match &node {
            Node::Var(Var::Bound(i)) => (1, i + 1, false),
            Node::Var(Var::Free(_)) => (1, 0, true),
            Node::Lam(b) => (b.size() + 1, b.loose().saturating_sub(1), b.has_free_names()),
            Node::App(a, b) | Node::Choice(a, b) => (
                a.size().saturating_add(b.size()).saturating_add(1),
                a.loose().max(b.loose()),
                a.has_free_names() || b.has_free_names(),
            ),
        };
        let hash = node_hash(&node);
        Term(Arc::new(Inner { node, hash, size, loose, has_free }))
    }

    pub fn var(v: Var) -> Term {
        Term::mk(Node::Var(v))
    }

    pub fn bound(i: u32) -> Term {
        Term::mk(Node::Var(Var::Bound(i)))
    }

    pub fn free(name: &str) -> Term {
        Term::mk(Node::Var(Var::Free(Arc::from(name))))
    }

    pub fn free_name(name: Name) -> Term {
        Term::mk(Node::Var(Var::Free(name)))
    }

    pub fn lam(body: Term) -> Term {
        Term::mk(Node::Lam(body))
    }

    /// Wraps `body` in `n` abstractions.
    pub fn lams(n: usize, body: Term) -> Term {
        (0..n).fold(body, |b, _| Term::lam(b))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::mk(Node::App(fun, arg))
    }

    /// Left-nested application `head a₁ … aₖ`.
    pub fn apps<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn choice(left: Term, right: Term) -> Term {
        Term::mk(Node::Choice(left, right))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> u32 {
        self.0.size
    }

    /// One more than the largest binder index that escapes this term.
    pub fn loose(&self) -> u32 {
        self.0.loose
    }

    pub fn has_free_names(&self) -> bool {
        self.0.has_free
    }

    /// No free names and no dangling binder indices.
    pub fn is_closed(&self) -> bool {
        self.0.loose == 0 && !self.0.has_free
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn as_lam(&self) -> Option<&Term> {
        match self.node() {
            Node::Lam(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_lam(&self) -> bool {
        matches!(self.node(), Node::Lam(_))
    }

    /// Strips leading abstractions, returning their count and the body.
    pub fn peel_lams(&self) -> (usize, &Term) {
        let mut t = self;
        let mut n = 0;
        while let Node::Lam(b) = t.node() {
            t = b;
            n += 1;
        }
        (n, t)
    }

    /// Splits `h a₁ … aₖ` into `h` and the arguments in order.
    pub fn unwind_apps(&self) -> (&Term, Vec<Term>) {
        let mut t = self;
        let mut args = Vec::new();
        while let Node::App(f, a) = t.node() {
            args.push(a.clone());
            t = f;
        }
        args.reverse();
        (t, args)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.ptr_eq(other)
            || (self.0.hash == other.0.hash && self.0.size == other.0.size && self.0.node == other.0.node)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

/// A fast total order: cached hash first, then size, then structure. It is
/// deterministic but carries no syntactic meaning.
impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        if self.ptr_eq(other) {
            return Ordering::Equal;
        }
        self.0.hash.cmp(&other.0.hash).then(self.0.size.cmp(&other.0.size)).then_with(|| self.0.node.cmp(&other.0.node))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", super::print(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print(self))
    }
}

impl Drop for Inner {
    // Long application spines would otherwise recurse once per node on drop.
    fn drop(&mut self) {
        let mut stack: Vec<Term> = Vec::new();
        let take = |n: &mut Node, stack: &mut Vec<Term>| {
            let placeholder = Node::Var(Var::Bound(0));
            match std::mem::replace(n, placeholder) {
                Node::Var(_) => {}
                Node::Lam(b) => stack.push(b),
                Node::App(a, b) | Node::Choice(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        };
        take(&mut self.node, &mut stack);
        while let Some(t) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(t.0) {
                take(&mut inner.node, &mut stack);
            }
        }
    }
}
