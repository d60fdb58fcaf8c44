//! Mass comparison under applicative contexts `(λx₁…xₙ.[·])P₁…Pₖ`.

use serde_json::{json, Value};

use super::game::{close_pair, Bounds};
use crate::bigstep::BigStep;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::smallstep::{mass_bounds, Caps, DeadCache};
use crate::syntax::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppVerdict {
    /// The left term converges with certainly more probability.
    LeftExceeds,
    RightExceeds,
    Inconclusive,
}

impl AppVerdict {
    pub fn name(self) -> &'static str {
        match self {
            AppVerdict::LeftExceeds => "left-exceeds",
            AppVerdict::RightExceeds => "right-exceeds",
            AppVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AppRow {
    pub args: Vec<Term>,
    pub left: Bounds,
    pub right: Bounds,
    pub verdict: AppVerdict,
}

#[derive(Clone, Debug)]
pub struct AppReport {
    pub rows: Vec<AppRow>,
}

impl AppReport {
    pub fn any(&self, v: AppVerdict) -> bool {
        self.rows.iter().any(|r| r.verdict == v)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "args": r.args.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "left": {"lower": r.left.lower.to_string(), "upper": r.left.upper.to_string()},
                    "right": {"lower": r.right.lower.to_string(), "upper": r.right.upper.to_string()},
                    "verdict": r.verdict.name(),
                })
            })
            .collect();
        json!({ "rows": rows })
    }
}

/// Every sequence over `pool` of length `0..=maxlen`, shortest first.
pub fn sequences(pool: &[Term], maxlen: usize) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Term>> = vec![Vec::new()];
    for _ in 0..maxlen {
        layer = layer
            .iter()
            .flat_map(|s| {
                pool.iter().map(move |p| {
                    let mut n = s.clone();
                    n.push(p.clone());
                    n
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Certified interval for the convergence probability of `t`.
pub struct MassOracle {
    pub fuel: u32,
    pub upper_steps: usize,
    eval: BigStep,
    dead: DeadCache,
}

impl MassOracle {
    pub fn new(fuel: u32) -> MassOracle {
        MassOracle { fuel, upper_steps: 32, eval: BigStep::new(), dead: DeadCache::default() }
    }

    pub fn bounds(&mut self, t: &Term) -> Result<Bounds> {
        let lower = self.eval.eval(t, self.fuel)?.mass();
        let caps = Caps { leaves: 1 << 10, max_term_size: 1 << 12 };
        let upper = match mass_bounds(t, self.upper_steps, &caps, &mut self.dead) {
            Ok(b) => b.upper.max(lower.clone()),
            Err(_) => Dyadic::one(),
        };
        Ok(Bounds { lower, upper })
    }
}

pub fn applicative_compare(m: &Term, n: &Term, seqs: &[Vec<Term>], fuel: u32) -> Result<AppReport> {
    let (m, n) = close_pair(m, n);
    let mut oracle = MassOracle::new(fuel);
    let mut rows = Vec::with_capacity(seqs.len());
    for args in seqs {
        let left = oracle.bounds(&Term::apps(m.clone(), args.iter().cloned()))?;
        let right = oracle.bounds(&Term::apps(n.clone(), args.iter().cloned()))?;
        let verdict = if left.lower > right.upper {
            AppVerdict::LeftExceeds
        } else if right.lower > left.upper {
            AppVerdict::RightExceeds
        } else {
            AppVerdict::Inconclusive
        };
        rows.push(AppRow { args: args.clone(), left, right, verdict });
    }
    Ok(AppReport { rows })
}
