//! Head reduction and head spine reduction as probabilistic transition
//! relations, with exact n-step convergence probabilities.

use std::collections::{HashMap, HashSet, VecDeque};

use serde_json::{json, Value};

use crate::bigstep::{EvalResult, DEFAULT_MAX_TERM_SIZE};
use crate::distr::Distr;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::syntax::{classify, instantiate, is_hnf, Redex, Shape, Term};

pub const DEFAULT_LEAF_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Contract the redex in head position.
    Head,
    /// Like `Head`, but `(λy.P)Q` with `P` not in hnf first reduces inside `P`.
    Spine,
}

/// Successors of a single step with their probabilities; they sum to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome(pub Vec<(Dyadic, Term)>);

impl StepOutcome {
    fn single(t: Term) -> StepOutcome {
        StepOutcome(vec![(Dyadic::one(), t)])
    }

    fn split(l: Term, r: Term) -> StepOutcome {
        if l == r {
            StepOutcome::single(l)
        } else {
            StepOutcome(vec![(Dyadic::half(), l), (Dyadic::half(), r)])
        }
    }

    pub fn total(&self) -> Dyadic {
        self.0.iter().map(|(p, _)| p).sum()
    }
}

/// One step of head reduction. Head normal forms loop on themselves.
pub fn head_step(m: &Term) -> StepOutcome {
    match classify(m) {
        Shape::Hnf(_) => StepOutcome::single(m.clone()),
        Shape::Redex(ctx, Redex::Beta { body, arg }) => StepOutcome::single(ctx.plug(instantiate(&body, &arg))),
        Shape::Redex(ctx, Redex::Choice { left, right }) => StepOutcome::split(ctx.plug(left), ctx.plug(right)),
    }
}

/// One step of head spine reduction.
pub fn spine_step(m: &Term) -> StepOutcome {
    match classify(m) {
        Shape::Hnf(_) => StepOutcome::single(m.clone()),
        Shape::Redex(ctx, Redex::Choice { left, right }) => StepOutcome::split(ctx.plug(left), ctx.plug(right)),
        Shape::Redex(ctx, Redex::Beta { body, arg }) => {
            if is_hnf(&body) {
                StepOutcome::single(ctx.plug(instantiate(&body, &arg)))
            } else {
                let inner = spine_step(&body);
                StepOutcome(
                    inner.0.into_iter().map(|(p, b)| (p, ctx.plug(Term::app(Term::lam(b), arg.clone())))).collect(),
                )
            }
        }
    }
}

pub fn step(m: &Term, strategy: Strategy) -> StepOutcome {
    match strategy {
        Strategy::Head => head_step(m),
        Strategy::Spine => spine_step(m),
    }
}

/// Caps bounding exhaustive exploration.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    /// Most distinct live states kept in a frontier or leaves in a tree.
    pub leaves: usize,
    pub max_term_size: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { leaves: DEFAULT_LEAF_CAP, max_term_size: DEFAULT_MAX_TERM_SIZE }
    }
}

/// Probability mass reached after a number of steps: hnfs absorbed so far
/// and the distribution over terms still reducing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frontier {
    pub absorbed: Distr,
    pub live: Distr,
}

impl Frontier {
    pub fn start(m: &Term) -> Frontier {
        if is_hnf(m) {
            Frontier { absorbed: Distr::point(m.clone()), live: Distr::bottom() }
        } else {
            Frontier { absorbed: Distr::bottom(), live: Distr::point(m.clone()) }
        }
    }

    pub fn advance(&self, strategy: Strategy, caps: &Caps) -> Result<Frontier> {
        let mut absorbed = self.absorbed.clone();
        let mut live = Distr::bottom();
        for (t, w) in self.live.iter() {
            for (p, s) in step(t, strategy).0 {
                if s.size() > caps.max_term_size {
                    return Err(Error::Resource { cap: "term size", limit: caps.max_term_size as usize });
                }
                let q = w * &p;
                if is_hnf(&s) {
                    absorbed.accumulate(s, q);
                } else {
                    live.accumulate(s, q);
                }
            }
            if live.len() > caps.leaves {
                return Err(Error::Resource { cap: "leaves", limit: caps.leaves });
            }
        }
        Ok(Frontier { absorbed, live })
    }
}

/// Cumulative convergence probabilities: row `n` maps each hnf to the
/// probability of reaching it within `n` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceTable {
    pub rows: Vec<Distr>,
}

impl ConvergenceTable {
    pub fn row(&self, n: usize) -> &Distr {
        &self.rows[n]
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let mut v = d.to_json();
                v["steps"] = json!(n);
                v
            })
            .collect();
        Value::Array(rows)
    }
}

pub fn convergence_table(m: &Term, n: usize, strategy: Strategy, caps: &Caps) -> Result<ConvergenceTable> {
    let mut fr = Frontier::start(m);
    let mut rows = vec![fr.absorbed.clone()];
    for _ in 0..n {
        if fr.live.is_empty() {
            rows.push(fr.absorbed.clone());
            continue;
        }
        fr = fr.advance(strategy, caps)?;
        rows.push(fr.absorbed.clone());
    }
    Ok(ConvergenceTable { rows })
}

/// Probabilities of having reached each hnf within `n` steps.
pub fn step_n(m: &Term, n: usize, strategy: Strategy) -> Result<Distr> {
    step_n_with(m, n, strategy, &Caps::default())
}

pub fn step_n_with(m: &Term, n: usize, strategy: Strategy, caps: &Caps) -> Result<Distr> {
    let mut fr = Frontier::start(m);
    for _ in 0..n {
        if fr.live.is_empty() {
            break;
        }
        fr = fr.advance(strategy, caps)?;
    }
    Ok(fr.absorbed)
}

/// Lower bound for the limit of head reduction after at most `n` steps.
pub fn h_inf_lower(m: &Term, n: usize) -> Result<EvalResult> {
    Ok(EvalResult::new(step_n(m, n, Strategy::Head)?))
}

/// A node of the (unmerged) reduction tree.
#[derive(Clone, Debug)]
pub struct StepTree {
    pub prob: Dyadic,
    pub term: Term,
    pub children: Vec<StepTree>,
}

impl StepTree {
    pub fn to_json(&self) -> Value {
        json!({
            "prob": self.prob.to_string(),
            "term": self.term.to_string(),
            "children": self.children.iter().map(StepTree::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn leaves(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(StepTree::leaves).sum()
        }
    }
}

/// The reduction tree of depth `steps`; head normal forms are leaves.
/// Probabilities on nodes are those of the individual step.
pub fn step_tree(m: &Term, steps: usize, strategy: Strategy, caps: &Caps) -> Result<StepTree> {
    let mut leaves = 1usize;
    build_tree(Dyadic::one(), m.clone(), steps, strategy, caps, &mut leaves)
}

fn build_tree(
    prob: Dyadic,
    term: Term,
    steps: usize,
    strategy: Strategy,
    caps: &Caps,
    leaves: &mut usize,
) -> Result<StepTree> {
    if steps == 0 || is_hnf(&term) {
        return Ok(StepTree { prob, term, children: Vec::new() });
    }
    let out = step(&term, strategy).0;
    *leaves += out.len() - 1;
    if *leaves > caps.leaves {
        return Err(Error::Resource { cap: "leaves", limit: caps.leaves });
    }
    let mut children = Vec::with_capacity(out.len());
    for (p, s) in out {
        if s.size() > caps.max_term_size {
            return Err(Error::Resource { cap: "term size", limit: caps.max_term_size as usize });
        }
        children.push(build_tree(p, s, steps - 1, strategy, caps, leaves)?);
    }
    Ok(StepTree { prob, term, children })
}

/// A meeting point for a spine step `M ⇢ₚ M'`: `M` reaches `m0` by a head
/// path of length `n0 + 1` and probability `p`, while `M'` reaches it by
/// `n0` deterministic head steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Commutation {
    Found { n0: usize, m0: Term },
    Unknown,
}

/// Head paths of exactly `k` steps from `m`, as distinct (end, probability) pairs.
fn head_paths(m: &Term, k: usize, caps: &Caps) -> Result<HashSet<(Term, Dyadic)>> {
    let mut level: HashSet<(Term, Dyadic)> = HashSet::from([(m.clone(), Dyadic::one())]);
    for _ in 0..k {
        let mut next = HashSet::new();
        for (t, w) in &level {
            for (p, s) in head_step(t).0 {
                next.insert((s, w * &p));
            }
        }
        if next.len() > caps.leaves {
            return Err(Error::Resource { cap: "leaves", limit: caps.leaves });
        }
        level = next;
    }
    Ok(level)
}

/// The deterministic head chain from `m`, up to `bound` steps; stops at the
/// first probabilistic choice.
fn deterministic_chain(m: &Term, bound: usize) -> Vec<Term> {
    let mut chain = vec![m.clone()];
    while chain.len() <= bound {
        let out = head_step(chain.last().unwrap()).0;
        if out.len() != 1 {
            break;
        }
        chain.push(out[0].1.clone());
    }
    chain
}

/// Searches for the meeting point of a spine step and head reduction,
/// trying `n0 = 0..=bound`.
pub fn spine_commutation_witness(m: &Term, p: &Dyadic, succ: &Term, bound: usize, caps: &Caps) -> Result<Commutation> {
    let chain = deterministic_chain(succ, bound);
    for (n0, m0) in chain.iter().enumerate() {
        let paths = head_paths(m, n0 + 1, caps)?;
        if paths.contains(&(m0.clone(), p.clone())) {
            return Ok(Commutation::Found { n0, m0: m0.clone() });
        }
    }
    Ok(Commutation::Unknown)
}

/// Re-checks a commutation witness from scratch.
pub fn replay_commutation(m: &Term, p: &Dyadic, succ: &Term, n0: usize, m0: &Term, caps: &Caps) -> Result<bool> {
    let chain = deterministic_chain(succ, n0);
    if chain.len() <= n0 || &chain[n0] != m0 {
        return Ok(false);
    }
    Ok(head_paths(m, n0 + 1, caps)?.contains(&(m0.clone(), p.clone())))
}

/// Most states explored when certifying divergence.
pub const DEFAULT_DEAD_NODES: usize = 256;

/// Certifies that head reduction from `t` never reaches an hnf: the set of
/// reachable terms is finite (within `node_cap`) and contains none.
/// `false` means "not certified", not "converges".
pub fn is_dead(t: &Term, node_cap: usize, max_term_size: u32) -> bool {
    let mut seen: HashSet<Term> = HashSet::from([t.clone()]);
    let mut queue = VecDeque::from([t.clone()]);
    while let Some(s) = queue.pop_front() {
        if is_hnf(&s) {
            return false;
        }
        for (_, n) in head_step(&s).0 {
            if n.size() > max_term_size {
                return false;
            }
            if seen.insert(n.clone()) {
                if seen.len() > node_cap {
                    return false;
                }
                queue.push_back(n);
            }
        }
    }
    true
}

/// Two-sided bounds on the convergence probability of a term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassBounds {
    pub lower: Dyadic,
    pub upper: Dyadic,
}

/// Bounds on total convergence mass: the lower bound is the mass absorbed
/// within `steps` head steps; the upper bound subtracts the live mass
/// certified dead.
pub fn mass_bounds(t: &Term, steps: usize, caps: &Caps, dead: &mut DeadCache) -> Result<MassBounds> {
    let mut fr = Frontier::start(t);
    for _ in 0..steps {
        if fr.live.is_empty() {
            break;
        }
        fr = fr.advance(Strategy::Head, caps)?;
    }
    let lower = fr.absorbed.mass();
    let dead_mass: Dyadic = fr.live.iter().filter(|(s, _)| dead.is_dead(s)).map(|(_, w)| w.clone()).sum();
    Ok(MassBounds { lower, upper: dead_mass.complement() })
}

/// Memoised divergence certification.
pub struct DeadCache {
    cache: HashMap<Term, bool>,
    node_cap: usize,
    max_term_size: u32,
}

impl Default for DeadCache {
    fn default() -> Self {
        DeadCache::new(DEFAULT_DEAD_NODES)
    }
}

impl DeadCache {
    pub fn new(node_cap: usize) -> DeadCache {
        DeadCache { cache: HashMap::new(), node_cap, max_term_size: 1 << 12 }
    }

    pub fn is_dead(&mut self, t: &Term) -> bool {
        if let Some(&b) = self.cache.get(t) {
            return b;
        }
        let b = is_dead(t, self.node_cap, self.max_term_size);
        self.cache.insert(t.clone(), b);
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn head_steps() {
        assert_eq!(head_step(&p("Omega")), StepOutcome::single(p("Omega")));
        assert_eq!(head_step(&p("x (+) x")), StepOutcome::single(p("x")));
        assert_eq!(head_step(&p("T (+) F")).0, vec![(d("1/2"), p("T")), (d("1/2"), p("F"))]);
        let t = p("(\\x.(\\y.x) y) z");
        assert_eq!(head_step(&t), StepOutcome::single(p("(\\y.z) y")));
        // α-equal branches collapse
        assert_eq!(head_step(&p("(\\a.a) (+) (\\b.b)")).0.len(), 1);
    }

    #[test]
    fn spine_steps() {
        let t = p("(\\x.(\\y.x) y) z");
        assert_eq!(spine_step(&t), StepOutcome::single(p("(\\x.x) z")));
        assert_eq!(spine_step(&p("T (+) F")).0.len(), 2);
        assert_eq!(spine_step(&p("\\x.I I")), StepOutcome::single(p("\\x.I")));
    }

    #[test]
    fn n_step_probabilities() {
        assert_eq!(step_n(&p("Omega (+) I"), 2, Strategy::Head).unwrap(), Distr::weighted(p("I"), d("1/2")));
        assert_eq!(step_n(&p("\\x.x z"), 0, Strategy::Head).unwrap(), Distr::point(p("\\x.x z")));
        let mm = p("(\\x.y (+) x x) (\\x.y (+) x x)");
        assert_eq!(step_n(&mm, 4, Strategy::Head).unwrap(), Distr::weighted(p("y"), d("3/4")));
        assert_eq!(step_n(&mm, 4, Strategy::Spine).unwrap(), Distr::weighted(p("y"), d("3/4")));
    }

    #[test]
    fn cumulative_lower_bounds() {
        assert!(h_inf_lower(&p("Omega"), 30).unwrap().distr.is_empty());
        assert_eq!(h_inf_lower(&p("I"), 0).unwrap().distr, Distr::point(p("I")));
        let r = h_inf_lower(&p("Delta (T (+) F)"), 4).unwrap();
        assert_eq!(r.distr.get(&p("I")), d("1/2"));
        assert_eq!(r.distr.get(&p("\\y.T")), d("1/4"));
        assert!(r.deficit.is_zero());
        let table = convergence_table(&p("Delta (T (+) F)"), 4, Strategy::Head, &Caps::default()).unwrap();
        let masses: Vec<String> = table.rows.iter().map(|r| r.mass().to_string()).collect();
        assert_eq!(masses, ["0", "0", "0", "1/2", "1"]);
    }

    #[test]
    fn reduction_tree() {
        let t = step_tree(&p("Delta (T (+) F)"), 4, Strategy::Head, &Caps::default()).unwrap();
        assert_eq!(t.leaves(), 3);
        let j = t.to_json();
        assert_eq!(j["prob"], "1");
    }

    #[test]
    fn leaf_cap() {
        let caps = Caps { leaves: 2, ..Caps::default() };
        let t = p("(x (+) y) ((a (+) b) ((c (+) d) e))");
        let many = p("Delta (Delta (T (+) F))");
        assert!(step_tree(&many, 12, Strategy::Head, &caps).is_err());
        assert!(step_tree(&t, 0, Strategy::Head, &caps).is_ok());
    }

    #[test]
    fn commutation_witnesses() {
        let m = p("(\\x.(\\y.x) y) z");
        let StepOutcome(out) = spine_step(&m);
        let (prob, succ) = &out[0];
        let w = spine_commutation_witness(&m, prob, succ, succ.size() as usize, &Caps::default()).unwrap();
        let Commutation::Found { n0, m0 } = w else { panic!("no witness") };
        assert!(replay_commutation(&m, prob, succ, n0, &m0, &Caps::default()).unwrap());
    }

    #[test]
    fn divergence_certificates() {
        assert!(is_dead(&p("Omega"), 16, 1000));
        assert!(is_dead(&p("I Omega"), 16, 1000));
        assert!(!is_dead(&p("Omega (+) I"), 16, 1000));
        let mut cache = DeadCache::default();
        let b = mass_bounds(&p("Omega (+) I"), 4, &Caps::default(), &mut cache).unwrap();
        assert_eq!((b.lower, b.upper), (d("1/2"), d("1/2")));
        let mm = p("(\\x.y (+) x x) (\\x.y (+) x x)");
        let b = mass_bounds(&mm, 6, &Caps::default(), &mut cache).unwrap();
        assert_eq!(b.upper, Dyadic::one());
    }
}
