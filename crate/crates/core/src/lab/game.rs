//! Bounded refutation of applicative (bi)similarity.
//!
//! The search walks pairs of states that any (bi)simulation relating the
//! two roots would be forced to relate, and stops at the first pair whose
//! τ-transitions are provably incompatible. Every comparison uses interval
//! bounds: lower bounds from fuel-bounded evaluation, upper bounds from
//! the mass certified to diverge. A `None` result is never evidence of
//! (bi)similarity.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde_json::{json, Value};

use super::markov::{transitions, MarkovState, StateDistr, TransitionLabel};
use crate::bigstep::BigStep;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::smallstep::{mass_bounds, Caps, DeadCache};
use crate::syntax::{abstract_free, constant, free_vars, instantiate, Name, Term};
use crate::tree::{tree_eq, ProbTree, TreeBuilder, TreeVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Simulation,
    Bisimulation,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Simulation => "simulation",
            Relation::Bisimulation => "bisimulation",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    /// Most labels (τ and applications) along a trace.
    pub depth: usize,
    pub fuel: u32,
    /// Closed arguments tried for application labels.
    pub pool: Vec<Term>,
    /// Tree level used to tell distinguished hnfs apart.
    pub tree_level: u32,
    /// Head steps explored when certifying divergence for upper bounds.
    pub upper_steps: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig { depth: 8, fuel: 16, pool: default_pool(), tree_level: 1, upper_steps: 32 }
    }
}

pub fn default_pool() -> Vec<Term> {
    ["I", "Omega", "Delta", "T", "F"].iter().filter_map(|c| constant(c)).collect()
}

/// Closes two terms over the union of their free names, in lexicographic
/// order with the first name outermost.
pub fn close_pair(m: &Term, n: &Term) -> (Term, Term) {
    let names: BTreeSet<Name> = free_vars(m).into_iter().chain(free_vars(n)).collect();
    let close = |t: &Term| names.iter().rev().fold(t.clone(), |acc, x| Term::lam(abstract_free(&acc, x)));
    (close(m), close(n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lower: Dyadic,
    pub upper: Dyadic,
}

impl Bounds {
    fn to_json(&self) -> Value {
        json!({"lower": self.lower.to_string(), "upper": self.upper.to_string()})
    }
}

/// The final incompatibility: τ-mass into `block` (every state when
/// `None`) is bounded by `left` on one side and `right` on the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    pub block: Option<Vec<MarkovState>>,
    pub left: Bounds,
    pub right: Bounds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub label: TransitionLabel,
    pub left: MarkovState,
    pub right: MarkovState,
}

/// A checkable certificate that two terms are not (bi)similar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguishingTrace {
    pub relation: Relation,
    pub steps: Vec<TraceStep>,
    pub separation: Separation,
}

impl DistinguishingTrace {
    /// All labels, ending with the separating τ.
    pub fn labels(&self) -> Vec<TransitionLabel> {
        let mut v: Vec<_> = self.steps.iter().map(|s| s.label.clone()).collect();
        v.push(TransitionLabel::Tau);
        v
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| json!({"label": s.label.to_string(), "left": s.left.to_string(), "right": s.right.to_string()}))
            .collect();
        let block = match &self.separation.block {
            None => Value::String("all".into()),
            Some(b) => Value::Array(b.iter().map(|s| Value::String(s.to_string())).collect()),
        };
        json!({
            "relation": self.relation.name(),
            "labels": self.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "steps": steps,
            "separation": {
                "block": block,
                "left": self.separation.left.to_json(),
                "right": self.separation.right.to_json(),
            },
        })
    }
}

struct TauView {
    lower: StateDistr,
    total: Bounds,
}

struct Examination {
    separation: Option<Separation>,
    forced: Vec<(MarkovState, MarkovState)>,
}

/// Game engine with caches shared across the search.
pub struct Game {
    relation: Relation,
    cfg: GameConfig,
    eval: BigStep,
    dead: DeadCache,
    trees: TreeBuilder,
    views: HashMap<Term, TauView>,
    tree_cache: HashMap<Term, ProbTree>,
}

fn sum_over<'a>(d: &StateDistr, states: impl IntoIterator<Item = &'a MarkovState>) -> Dyadic {
    states.into_iter().map(|s| d.get(s).cloned().unwrap_or_default()).sum()
}

impl Game {
    pub fn new(relation: Relation, cfg: GameConfig) -> Game {
        let trees = TreeBuilder::new(cfg.fuel);
        Game {
            relation,
            cfg,
            eval: BigStep::new(),
            dead: DeadCache::default(),
            trees,
            views: HashMap::new(),
            tree_cache: HashMap::new(),
        }
    }

    fn upper_mass(&mut self, t: &Term) -> Dyadic {
        let caps = Caps { leaves: 1 << 10, max_term_size: 1 << 12 };
        match mass_bounds(t, self.cfg.upper_steps, &caps, &mut self.dead) {
            Ok(b) => b.upper,
            Err(_) => Dyadic::one(),
        }
    }

    fn tau_view(&mut self, t: &Term) -> Result<&TauView> {
        if !self.views.contains_key(t) {
            let lower =
                transitions(&MarkovState::Term(t.clone()), &TransitionLabel::Tau, &mut self.eval, self.cfg.fuel)?;
            let low: Dyadic = lower.values().sum();
            // both are bounds on the same quantity; the max is still sound
            let upper = self.upper_mass(t).max(low.clone());
            self.views.insert(t.clone(), TauView { lower, total: Bounds { lower: low, upper } });
        }
        Ok(&self.views[t])
    }

    fn tree_of(&mut self, body: &Term) -> Result<ProbTree> {
        if let Some(t) = self.tree_cache.get(body) {
            return Ok(t.clone());
        }
        let t = self.trees.prob_tree(&Term::lam(body.clone()), self.cfg.tree_level)?;
        self.tree_cache.insert(body.clone(), t.clone());
        Ok(t)
    }

    fn tree_different(&mut self, a: &MarkovState, b: &MarkovState) -> Result<bool> {
        match (a, b) {
            (MarkovState::Hnf(x), MarkovState::Hnf(y)) => {
                if x == y {
                    return Ok(false);
                }
                let (tx, ty) = (self.tree_of(x)?, self.tree_of(y)?);
                Ok(matches!(tree_eq(&tx, &ty)?, TreeVerdict::Different(_)))
            }
            _ => Ok(false),
        }
    }

    /// Groups states that may share a bisimilarity class: states in
    /// different groups have provably different trees.
    fn components(&mut self, states: &[MarkovState]) -> Result<Vec<Vec<MarkovState>>> {
        let n = states.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for i in 0..n {
            for j in i + 1..n {
                if !self.tree_different(&states[i], &states[j])? {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut groups: Vec<Vec<MarkovState>> = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            let r = find(&mut parent, i);
            let g = *index.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(s.clone());
        }
        Ok(groups)
    }

    fn views_of(&mut self, s: &Term, t: &Term) -> Result<(StateDistr, Bounds, StateDistr, Bounds)> {
        let v = self.tau_view(s)?;
        let (ls, bs) = (v.lower.clone(), v.total.clone());
        let v = self.tau_view(t)?;
        Ok((ls, bs, v.lower.clone(), v.total.clone()))
    }

    fn examine(&mut self, s: &Term, t: &Term) -> Result<Examination> {
        let (mu, mb, nu, nb) = self.views_of(s, t)?;
        let slack_mu = mb.upper.saturating_sub(&mb.lower);
        let slack_nu = nb.upper.saturating_sub(&nb.lower);
        let total = Separation { block: None, left: mb.clone(), right: nb.clone() };
        let mut forced = Vec::new();
        match self.relation {
            Relation::Simulation => {
                if mb.lower > nb.upper {
                    return Ok(Examination { separation: Some(total), forced });
                }
                for (a, wa) in &mu {
                    for (b, wb) in &nu {
                        if wa > &nb.upper.saturating_sub(wb) {
                            forced.push((a.clone(), b.clone()));
                        }
                    }
                }
            }
            Relation::Bisimulation => {
                if mb.lower > nb.upper || nb.lower > mb.upper {
                    return Ok(Examination { separation: Some(total), forced });
                }
                let states: Vec<MarkovState> =
                    mu.keys().chain(nu.keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
                let groups = self.components(&states)?;
                for g in &groups {
                    let (ml, nl) = (sum_over(&mu, g), sum_over(&nu, g));
                    if ml > &nl + &slack_nu || nl > &ml + &slack_mu {
                        let sep = Separation {
                            block: Some(g.clone()),
                            left: Bounds { upper: &ml + &slack_mu, lower: ml },
                            right: Bounds { upper: &nl + &slack_nu, lower: nl },
                        };
                        return Ok(Examination { separation: Some(sep), forced });
                    }
                }
                for g in &groups {
                    let (ml, nl) = (sum_over(&mu, g), sum_over(&nu, g));
                    for a in g.iter().filter(|a| mu.contains_key(*a)) {
                        for b in g.iter().filter(|b| nu.contains_key(*b)) {
                            let (wa, wb) = (&mu[a], &nu[b]);
                            let left_forces = wa > &(&nl.saturating_sub(wb) + &slack_nu);
                            let right_forces = wb > &(&ml.saturating_sub(wa) + &slack_mu);
                            if left_forces || right_forces {
                                forced.push((a.clone(), b.clone()));
                            }
                        }
                    }
                }
            }
        }
        Ok(Examination { separation: None, forced })
    }

    /// Breadth-first search for the shortest distinguishing trace.
    pub fn refute(&mut self, m: &Term, n: &Term) -> Result<Option<DistinguishingTrace>> {
        let (m, n) = close_pair(m, n);
        let start = (MarkovState::Term(m), MarkovState::Term(n));
        let mut seen: HashSet<(MarkovState, MarkovState)> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([(start, Vec::<TraceStep>::new())]);
        let pool = self.cfg.pool.clone();
        while let Some(((a, b), steps)) = queue.pop_front() {
            match (&a, &b) {
                (MarkovState::Term(s), MarkovState::Term(t)) => {
                    if steps.len() + 1 > self.cfg.depth {
                        continue;
                    }
                    let ex = match self.examine(s, t) {
                        Ok(ex) => ex,
                        // a branch too large to evaluate is just not explored
                        Err(Error::Resource { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    if let Some(separation) = ex.separation {
                        return Ok(Some(DistinguishingTrace { relation: self.relation, steps, separation }));
                    }
                    for pair in ex.forced {
                        if seen.insert(pair.clone()) {
                            let mut next = steps.clone();
                            next.push(TraceStep {
                                label: TransitionLabel::Tau,
                                left: pair.0.clone(),
                                right: pair.1.clone(),
                            });
                            queue.push_back((pair, next));
                        }
                    }
                }
                (MarkovState::Hnf(x), MarkovState::Hnf(y)) => {
                    if steps.len() + 2 > self.cfg.depth {
                        continue;
                    }
                    for arg in &pool {
                        let pair = (MarkovState::Term(instantiate(x, arg)), MarkovState::Term(instantiate(y, arg)));
                        if seen.insert(pair.clone()) {
                            let mut next = steps.clone();
                            next.push(TraceStep {
                                label: TransitionLabel::Apply(arg.clone()),
                                left: pair.0.clone(),
                                right: pair.1.clone(),
                            });
                            queue.push_back((pair, next));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(None)
    }

    /// Re-executes a trace from the roots, checking every forced step and
    /// recomputing the final separation from scratch.
    pub fn replay(&mut self, m: &Term, n: &Term, trace: &DistinguishingTrace) -> Result<bool> {
        if trace.relation != self.relation || trace.steps.len() + 1 > self.cfg.depth {
            return Ok(false);
        }
        let (m, n) = close_pair(m, n);
        let (mut a, mut b) = (MarkovState::Term(m), MarkovState::Term(n));
        for st in &trace.steps {
            match (&st.label, &a, &b) {
                (TransitionLabel::Tau, MarkovState::Term(s), MarkovState::Term(t)) => {
                    let ex = self.examine(&s.clone(), &t.clone())?;
                    if !ex.forced.contains(&(st.left.clone(), st.right.clone())) {
                        return Ok(false);
                    }
                }
                (TransitionLabel::Apply(arg), MarkovState::Hnf(x), MarkovState::Hnf(y)) => {
                    if !arg.is_closed()
                        || st.left != MarkovState::Term(instantiate(x, arg))
                        || st.right != MarkovState::Term(instantiate(y, arg))
                    {
                        return Ok(false);
                    }
                }
                _ => return Ok(false),
            }
            a = st.left.clone();
            b = st.right.clone();
        }
        let (MarkovState::Term(s), MarkovState::Term(t)) = (&a, &b) else { return Ok(false) };
        self.verify_separation(&s.clone(), &t.clone(), &trace.separation)
    }

    fn verify_separation(&mut self, s: &Term, t: &Term, sep: &Separation) -> Result<bool> {
        let (mu, mb, nu, nb) = self.views_of(s, t)?;
        let (left, right) = match &sep.block {
            None => (mb, nb),
            Some(block) => {
                if self.relation != Relation::Bisimulation {
                    return Ok(false);
                }
                // the block must be a union of the groups
                let states: Vec<MarkovState> =
                    mu.keys().chain(nu.keys()).cloned().collect::<BTreeSet<_>>().into_iter().collect();
                let set: BTreeSet<&MarkovState> = block.iter().collect();
                for g in self.components(&states)? {
                    let inside = g.iter().filter(|x| set.contains(x)).count();
                    if inside != 0 && inside != g.len() {
                        return Ok(false);
                    }
                }
                let slack_mu = mb.upper.saturating_sub(&mb.lower);
                let slack_nu = nb.upper.saturating_sub(&nb.lower);
                let (ml, nl) = (sum_over(&mu, block), sum_over(&nu, block));
                (Bounds { upper: &ml + &slack_mu, lower: ml }, Bounds { upper: &nl + &slack_nu, lower: nl })
            }
        };
        if left != sep.left || right != sep.right {
            return Ok(false);
        }
        Ok(match self.relation {
            Relation::Simulation => left.lower > right.upper,
            Relation::Bisimulation => left.lower > right.upper || right.lower > left.upper,
        })
    }
}

/// Looks for a trace refuting `m ∼ n`.
pub fn refute_bisim(m: &Term, n: &Term, cfg: GameConfig) -> Result<Option<DistinguishingTrace>> {
    Game::new(Relation::Bisimulation, cfg).refute(m, n)
}

/// Looks for a trace refuting `m ≾ n`.
pub fn refute_sim(m: &Term, n: &Term, cfg: GameConfig) -> Result<Option<DistinguishingTrace>> {
    Game::new(Relation::Simulation, cfg).refute(m, n)
}

pub fn replay(m: &Term, n: &Term, trace: &DistinguishingTrace, cfg: GameConfig) -> Result<bool> {
    Game::new(trace.relation, cfg).replay(m, n, trace)
}
