//! Level-indexed probabilistic Nakajima trees (infinitely η-expanded Böhm
//! trees) computed from fuel-bounded evaluation.
//!
//! The value tree of `λx₁…xₙ.y M₁…Mₘ` is the infinite object
//! `λx₁x₂… . y M₁…Mₘ xₙ₊₁ xₙ₊₂ …`. It is stored finitely as the binder count,
//! the head and the explicit children, with trailing children that merely
//! repeat the implicit tail trimmed away. Binders are addressed by the depth
//! of the node that introduces them and their position there, so the
//! fresh η-binders need no names.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::bigstep::BigStep;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::syntax::{hnf_view, open_with, shift, HnfView, Name, Node, Term, Var};

/// Reference to the head variable of a value tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeadRef {
    Free(Name),
    /// Binder `pos` (1-based) of the value-tree node at `depth` (root = 0).
    Bound {
        depth: u32,
        pos: u32,
    },
}

impl HeadRef {
    pub fn render(&self) -> String {
        match self {
            HeadRef::Free(n) => n.to_string(),
            HeadRef::Bound { depth, pos } => format!("{}{pos}", depth_letter(*depth)),
        }
    }
}

fn depth_letter(depth: u32) -> String {
    const L: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    let base = L[depth as usize % L.len()];
    let round = depth as usize / L.len();
    if round == 0 {
        base.to_string()
    } else {
        format!("{base}{}", "'".repeat(round))
    }
}

// Binder references are carried through evaluation as free names that the
// surface syntax cannot produce.
fn binder_name(depth: u32, pos: u32) -> Name {
    Arc::from(format!("%{depth}.{pos}"))
}

fn head_ref(v: &Var) -> HeadRef {
    match v {
        Var::Free(n) => match n.strip_prefix('%').and_then(|s| s.split_once('.')) {
            Some((d, p)) => match (d.parse(), p.parse()) {
                (Ok(depth), Ok(pos)) => HeadRef::Bound { depth, pos },
                _ => HeadRef::Free(n.clone()),
            },
            None => HeadRef::Free(n.clone()),
        },
        Var::Bound(_) => unreachable!("binders are opened before the head is read"),
    }
}

/// A level-`level` value tree in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueTree {
    pub level: u32,
    pub binders: u32,
    pub head: HeadRef,
    pub args: Vec<ProbTree>,
}

/// A distribution over level-`level` value trees, plus the mass not yet
/// accounted for by the fuel-bounded evaluation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbTree {
    pub level: u32,
    pub weights: BTreeMap<ValueTree, Dyadic>,
    pub deficit: Dyadic,
}

/// Shape of a value tree that no amount of extra fuel can change: the
/// head, and at level ≥ 2 also the offset `n − m` fixing the implicit tail.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct TreeShape {
    head: HeadRef,
    offset: Option<i64>,
}

impl ValueTree {
    fn shape(&self) -> TreeShape {
        let offset = (self.level >= 2).then(|| self.binders as i64 - self.args.len() as i64);
        TreeShape { head: self.head.clone(), offset }
    }

    /// The `i`-th child (0-based), including implicit tail children.
    pub fn child(&self, i: usize, depth: u32) -> ProbTree {
        match self.args.get(i) {
            Some(t) => t.clone(),
            None => {
                let pos = self.binders as usize + i + 1 - self.args.len();
                eta_tree(&HeadRef::Bound { depth, pos: pos as u32 }, self.level - 1)
            }
        }
    }

    fn is_exact(&self) -> bool {
        self.args.iter().all(ProbTree::is_exact)
    }

    pub fn render_head(&self) -> String {
        self.head.render()
    }

    pub fn to_json(&self, weight: &Dyadic) -> Value {
        json!({
            "binders": self.binders,
            "head": self.head.render(),
            "args": self.args.iter().map(ProbTree::to_json).collect::<Vec<_>>(),
            "weight": weight.to_string(),
        })
    }
}

/// Trims trailing children equal to the implicit η-tail. `depth` is the
/// depth of the node itself. Idempotent.
pub fn canonicalize(mut vt: ValueTree, depth: u32) -> ValueTree {
    if vt.level <= 1 {
        vt.args.clear();
        vt.binders = match vt.head {
            HeadRef::Bound { depth: d, pos } if d == depth => pos,
            _ => 0,
        };
        return vt;
    }
    while vt.binders > 0 && !vt.args.is_empty() {
        let last = HeadRef::Bound { depth, pos: vt.binders };
        if vt.head == last || vt.args.last() != Some(&eta_tree(&last, vt.level - 1)) {
            break;
        }
        vt.args.pop();
        vt.binders -= 1;
    }
    vt
}

impl ProbTree {
    pub fn bottom(level: u32) -> ProbTree {
        ProbTree { level, weights: BTreeMap::new(), deficit: Dyadic::zero() }
    }

    pub fn mass(&self) -> Dyadic {
        self.weights.values().sum()
    }

    /// No deficit here or anywhere below.
    pub fn is_exact(&self) -> bool {
        self.deficit.is_zero() && self.weights.keys().all(ValueTree::is_exact)
    }

    /// Root deficit plus the weighted deficits of all nested children,
    /// capped at 1.
    pub fn deficit_bound(&self) -> Dyadic {
        let mut total = self.deficit.clone();
        for (vt, w) in &self.weights {
            let inner: Dyadic = vt.args.iter().map(ProbTree::deficit_bound).sum();
            total = &total + &(w * &inner);
        }
        total.min(Dyadic::one())
    }

    pub fn to_json(&self) -> Value {
        let trees: Vec<Value> = self.weights.iter().map(|(vt, w)| vt.to_json(w)).collect();
        json!({"level": self.level, "trees": trees, "deficit": self.deficit.to_string()})
    }

    /// Indented text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0, 0);
        out
    }

    fn render_into(&self, out: &mut String, indent: usize, depth: u32) {
        let pad = "  ".repeat(indent);
        if self.weights.is_empty() {
            let _ = writeln!(out, "{pad}⊥{}", deficit_note(&self.deficit));
            return;
        }
        if !self.deficit.is_zero() {
            let _ = writeln!(out, "{pad}(deficit {})", self.deficit);
        }
        for (vt, w) in &self.weights {
            let binders: Vec<String> = (1..=vt.binders).map(|p| HeadRef::Bound { depth, pos: p }.render()).collect();
            let _ = writeln!(out, "{pad}{w}: λ{}….{}", binders.join(" "), vt.head.render());
            for a in &vt.args {
                a.render_into(out, indent + 1, depth + 1);
            }
        }
    }
}

fn deficit_note(d: &Dyadic) -> String {
    if d.is_zero() {
        String::new()
    } else {
        format!(" (deficit {d})")
    }
}

/// The level-`level` tree of a bare variable.
pub fn eta_tree(v: &HeadRef, level: u32) -> ProbTree {
    if level == 0 {
        return ProbTree::bottom(0);
    }
    let vt = ValueTree { level, binders: 0, head: v.clone(), args: Vec::new() };
    let mut weights = BTreeMap::new();
    weights.insert(vt, Dyadic::one());
    ProbTree { level, weights, deficit: Dyadic::zero() }
}

/// Builds trees with one evaluator and one fuel budget for every node.
pub struct TreeBuilder {
    eval: BigStep,
    fuel: u32,
    memo: HashMap<(Term, u32, u32), ProbTree>,
}

impl TreeBuilder {
    pub fn new(fuel: u32) -> TreeBuilder {
        TreeBuilder { eval: BigStep::new(), fuel, memo: HashMap::new() }
    }

    pub fn prob_tree(&mut self, m: &Term, level: u32) -> Result<ProbTree> {
        self.prob_tree_at(m, level, 0)
    }

    pub fn value_tree(&mut self, h: &HnfView, level: u32) -> Result<ValueTree> {
        self.value_tree_at(&h.to_term(), level, 0)
    }

    fn prob_tree_at(&mut self, m: &Term, level: u32, depth: u32) -> Result<ProbTree> {
        if level == 0 {
            return Ok(ProbTree::bottom(0));
        }
        let key = (m.clone(), level, depth);
        if let Some(t) = self.memo.get(&key) {
            return Ok(t.clone());
        }
        let d = self.eval.eval(m, self.fuel)?;
        let mut weights: BTreeMap<ValueTree, Dyadic> = BTreeMap::new();
        for (h, w) in d.iter() {
            let vt = self.value_tree_at(h, level, depth)?;
            let slot = weights.entry(vt).or_default();
            *slot = &*slot + w;
        }
        let tree = ProbTree { level, weights, deficit: d.mass().complement() };
        self.memo.insert(key, tree.clone());
        Ok(tree)
    }

    fn value_tree_at(&mut self, h: &Term, level: u32, depth: u32) -> Result<ValueTree> {
        let view = hnf_view(h).expect("evaluation only yields head normal forms");
        let n = view.binders as u32;
        // index 0 is the innermost binder, i.e. position n
        let names: Vec<Name> = (1..=n).rev().map(|p| binder_name(depth, p)).collect();
        let head_term = open_with(&Term::var(view.head.clone()), &names);
        let head = match head_term.node() {
            Node::Var(v) => head_ref(v),
            _ => unreachable!(),
        };
        let mut args = Vec::new();
        if level >= 2 {
            for a in &view.args {
                let opened = open_with(a, &names);
                args.push(self.prob_tree_at(&opened, level - 1, depth + 1)?);
            }
        }
        let vt = ValueTree { level, binders: n, head, args };
        Ok(canonicalize(vt, depth))
    }
}

pub fn prob_tree(m: &Term, level: u32, fuel: u32) -> Result<ProbTree> {
    TreeBuilder::new(fuel).prob_tree(m, level)
}

pub fn value_tree(h: &HnfView, level: u32, fuel: u32) -> Result<ValueTree> {
    TreeBuilder::new(fuel).value_tree(h, level)
}

/// `λx₁…xₙ z. y M₁…Mₘ z` for an hnf `λx₁…xₙ. y M₁…Mₘ`.
pub fn eta_expand(h: &Term) -> Term {
    let (n, body) = h.peel_lams();
    Term::lams(n + 1, Term::app(shift(body, 1, 0), Term::bound(0)))
}

/// Where two trees were found to differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    /// Child indices (0-based) followed from the roots.
    pub path: Vec<usize>,
    /// The value tree (or tree shape) whose weights differ.
    pub at: String,
    pub left: Dyadic,
    pub right: Dyadic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeVerdict {
    Equal,
    Different(Divergence),
    /// The computed trees do not settle the question; a difference could
    /// hide in at most `bound` missing mass.
    Unknown {
        bound: Dyadic,
    },
}

impl TreeVerdict {
    pub fn to_json(&self) -> Value {
        match self {
            TreeVerdict::Equal => json!({"verdict": "equal"}),
            TreeVerdict::Different(d) => json!({
                "verdict": "different",
                "path": d.path,
                "at": d.at,
                "left": d.left.to_string(),
                "right": d.right.to_string(),
            }),
            TreeVerdict::Unknown { bound } => json!({"verdict": "unknown", "bound": bound.to_string()}),
        }
    }
}

fn describe_shape(s: &TreeShape) -> String {
    match s.offset {
        None => format!("head {}", s.head.render()),
        Some(o) => format!("head {} with offset {o}", s.head.render()),
    }
}

fn describe_vt(vt: &ValueTree, depth: u32) -> String {
    let binders: Vec<String> = (1..=vt.binders).map(|p| HeadRef::Bound { depth, pos: p }.render()).collect();
    format!("λ{}….{} with {} explicit children", binders.join(" "), vt.head.render(), vt.args.len())
}

/// Compares two trees of the same level. `Equal` is only claimed when
/// both are exact; `Different` only when no completion of the missing
/// mass could reconcile them.
pub fn tree_eq(a: &ProbTree, b: &ProbTree) -> Result<TreeVerdict> {
    if a.level != b.level {
        return Err(Error::LevelMismatch { left: a.level as usize, right: b.level as usize });
    }
    let exact = a.is_exact() && b.is_exact();
    if exact {
        return Ok(match first_difference(a, b, 0, &mut Vec::new()) {
            None => TreeVerdict::Equal,
            Some(d) => TreeVerdict::Different(d),
        });
    }
    if let Some(d) = certified_difference(a, b) {
        return Ok(TreeVerdict::Different(d));
    }
    Ok(TreeVerdict::Unknown { bound: (&a.deficit_bound() + &b.deficit_bound()).min(Dyadic::one()) })
}

fn first_difference(a: &ProbTree, b: &ProbTree, depth: u32, path: &mut Vec<usize>) -> Option<Divergence> {
    if a == b {
        return None;
    }
    if a.weights.len() == 1 && b.weights.len() == 1 {
        let (va, wa) = a.weights.iter().next().unwrap();
        let (vb, wb) = b.weights.iter().next().unwrap();
        if wa == wb && va.shape() == vb.shape() && va.level >= 2 {
            let len = va.args.len().max(vb.args.len());
            for i in 0..len {
                let (ca, cb) = (va.child(i, depth), vb.child(i, depth));
                if ca != cb {
                    path.push(i);
                    return first_difference(&ca, &cb, depth + 1, path);
                }
            }
        }
    }
    let keys = a.weights.keys().chain(b.weights.keys());
    for k in keys {
        let wa = a.weights.get(k).cloned().unwrap_or_default();
        let wb = b.weights.get(k).cloned().unwrap_or_default();
        if wa != wb {
            return Some(Divergence { path: path.clone(), at: describe_vt(k, depth), left: wa, right: wb });
        }
    }
    None
}

// Interval reasoning at the root: the mass a tree can eventually put on a
// shape, or on a value tree whose children are already exact, is bounded
// below by what is computed and above by that plus everything that could
// still turn into it.
fn certified_difference(a: &ProbTree, b: &ProbTree) -> Option<Divergence> {
    let shapes = |t: &ProbTree| {
        let mut m: BTreeMap<TreeShape, Dyadic> = BTreeMap::new();
        for (vt, w) in &t.weights {
            let s = m.entry(vt.shape()).or_default();
            *s = &*s + w;
        }
        m
    };
    let (sa, sb) = (shapes(a), shapes(b));
    for s in sa.keys().chain(sb.keys()) {
        let la = sa.get(s).cloned().unwrap_or_default();
        let lb = sb.get(s).cloned().unwrap_or_default();
        if la > &lb + &b.deficit || lb > &la + &a.deficit {
            return Some(Divergence { path: Vec::new(), at: describe_shape(s), left: la, right: lb });
        }
    }
    let pending = |t: &ProbTree, s: &TreeShape| -> Dyadic {
        let open: Dyadic = t.weights.iter().filter(|(vt, _)| !vt.is_exact() && &vt.shape() == s).map(|(_, w)| w).sum();
        &open + &t.deficit
    };
    let finals = a.weights.keys().chain(b.weights.keys()).filter(|vt| vt.is_exact());
    for k in finals {
        let s = k.shape();
        let la = a.weights.get(k).cloned().unwrap_or_default();
        let lb = b.weights.get(k).cloned().unwrap_or_default();
        if la > &lb + &pending(b, &s) || lb > &la + &pending(a, &s) {
            return Some(Divergence { path: Vec::new(), at: describe_vt(k, 0), left: la, right: lb });
        }
    }
    None
}
