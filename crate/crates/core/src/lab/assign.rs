//! Probabilistic assignments: a Hall-type covering check and an exact
//! max-flow construction of the per-element shares.

use std::collections::{BTreeMap, VecDeque};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

pub const MAX_ELEMENTS: usize = 12;

/// Subsets of `{1..n}` are bitmasks with bit `k-1` for element `k`.
pub type Subset = u32;

pub fn render_subset(mask: Subset) -> String {
    let items: Vec<String> = (0..32).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn parse_subset(s: &str, n: usize) -> Result<Subset> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .and_then(|x| x.strip_suffix('}'))
        .ok_or_else(|| Error::BadProblem(format!("subset `{s}` is not of the form {{1,2}}")))?;
    let mut mask = 0;
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: usize = part.parse().map_err(|_| Error::BadProblem(format!("bad element `{part}` in `{s}`")))?;
        if k == 0 || k > n {
            return Err(Error::BadProblem(format!("element {k} out of range 1..={n}")));
        }
        mask |= 1 << (k - 1);
    }
    Ok(mask)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentProblem {
    pub p: Vec<Dyadic>,
    /// Omitted subsets carry weight 0.
    pub r: BTreeMap<Subset, Dyadic>,
}

impl AssignmentProblem {
    pub fn new(p: Vec<Dyadic>, r: BTreeMap<Subset, Dyadic>) -> Result<AssignmentProblem> {
        let n = p.len();
        if n > MAX_ELEMENTS {
            return Err(Error::Resource { cap: "assignment elements", limit: MAX_ELEMENTS });
        }
        for v in p.iter().chain(r.values()) {
            if *v > Dyadic::one() {
                return Err(Error::BadProblem(format!("value {v} exceeds 1")));
            }
        }
        if let Some(bad) = r.keys().find(|&&m| m >> n != 0) {
            return Err(Error::BadProblem(format!("subset {} mentions elements beyond {n}", render_subset(*bad))));
        }
        Ok(AssignmentProblem { p, r })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn r_of(&self, mask: Subset) -> Dyadic {
        self.r.get(&mask).cloned().unwrap_or_default()
    }

    /// Reads `{"p":["1/2","1/2"],"r":{"{1,2}":"1"}}`.
    pub fn from_json(text: &str) -> Result<AssignmentProblem> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::BadProblem(e.to_string()))?;
        let num = |x: &Value| -> Result<Dyadic> {
            let s = match x {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(Error::BadProblem(format!("expected a probability, got {x}"))),
            };
            s.parse().map_err(|_| Error::BadProblem(format!("`{s}` is not a dyadic rational")))
        };
        let p = v
            .get("p")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::BadProblem("missing array `p`".into()))?
            .iter()
            .map(num)
            .collect::<Result<Vec<_>>>()?;
        let mut r = BTreeMap::new();
        if let Some(obj) = v.get("r") {
            let obj = obj.as_object().ok_or_else(|| Error::BadProblem("`r` must be an object".into()))?;
            for (k, x) in obj {
                let mask = parse_subset(k, p.len())?;
                let w = num(x)?;
                if !w.is_zero() {
                    r.insert(mask, w);
                }
            }
        }
        AssignmentProblem::new(p, r)
    }

    pub fn to_json(&self) -> Value {
        let r: Map<String, Value> =
            self.r.iter().map(|(m, w)| (render_subset(*m), Value::String(w.to_string()))).collect();
        json!({"p": self.p.iter().map(|x| x.to_string()).collect::<Vec<_>>(), "r": r})
    }

    /// Total `r` over the subsets meeting `mask`.
    fn covering(&self, mask: Subset) -> Dyadic {
        self.r.iter().filter(|(j, _)| *j & mask != 0).map(|(_, w)| w.clone()).sum()
    }
}

/// The first subset `I` (in mask order) with `Σ_{i∈I} pᵢ > Σ_{J∩I≠∅} r_J`,
/// or `None` when the covering condition holds everywhere.
pub fn check(prob: &AssignmentProblem) -> Option<Subset> {
    (1..1u32 << prob.n()).find(|&mask| {
        let demand: Dyadic = (0..prob.n()).filter(|i| mask >> i & 1 == 1).map(|i| prob.p[i].clone()).sum();
        demand > prob.covering(mask)
    })
}

/// Shares `s_{k,J}`; absent entries are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentSolution {
    pub s: BTreeMap<(usize, Subset), BigRational>,
}

impl AssignmentSolution {
    pub fn share(&self, k: usize, mask: Subset) -> BigRational {
        self.s.get(&(k, mask)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Both conditions, exactly: every `pₖ ≤ Σ_{J∋k} s_{k,J}·r_J`, every
    /// `Σ_{k∈J} s_{k,J} ≤ 1`, all shares in `[0,1]` and only for `k ∈ J`.
    pub fn satisfies(&self, prob: &AssignmentProblem) -> bool {
        let one = BigRational::from_integer(1.into());
        for (&(k, mask), v) in &self.s {
            if k >= prob.n() || mask >> k & 1 == 0 || v.is_negative() || *v > one {
                return false;
            }
        }
        for k in 0..prob.n() {
            let got: BigRational =
                self.s.iter().filter(|((i, _), _)| *i == k).map(|((_, m), v)| v * prob.r_of(*m).to_rational()).sum();
            if prob.p[k].to_rational() > got {
                return false;
            }
        }
        let mut per_subset: BTreeMap<Subset, BigRational> = BTreeMap::new();
        for (&(_, m), v) in &self.s {
            *per_subset.entry(m).or_insert_with(BigRational::zero) += v;
        }
        per_subset.values().all(|t| *t <= one)
    }

    pub fn to_json(&self) -> Value {
        let s: Vec<Value> = self
            .s
            .iter()
            .map(|((k, m), v)| json!({"k": k + 1, "subset": render_subset(*m), "share": v.to_string()}))
            .collect();
        json!({ "s": s })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solve {
    Solved(AssignmentSolution),
    Infeasible { witness: Subset },
}

impl Solve {
    pub fn to_json(&self) -> Value {
        match self {
            Solve::Solved(s) => {
                let mut v = s.to_json();
                v["feasible"] = Value::Bool(true);
                v
            }
            Solve::Infeasible { witness } => json!({"feasible": false, "witness": render_subset(*witness)}),
        }
    }
}

struct Edge {
    to: usize,
    cap: BigRational,
}

struct FlowNet {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(nodes: usize) -> FlowNet {
        FlowNet { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, a: usize, b: usize, cap: BigRational) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: b, cap });
        self.edges.push(Edge { to: a, cap: BigRational::zero() });
        self.adj[a].push(id);
        self.adj[b].push(id + 1);
        id
    }

    /// Edmonds–Karp; leaves residual capacities in place.
    fn max_flow(&mut self, s: usize, t: usize) -> BigRational {
        let mut total = BigRational::zero();
        loop {
            let mut via: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut q = VecDeque::from([s]);
            let mut reached = false;
            while let Some(u) = q.pop_front() {
                if u == t {
                    reached = true;
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if v != s && via[v].is_none() && self.edges[e].cap.is_positive() {
                        via[v] = Some(e);
                        q.push_back(v);
                    }
                }
            }
            if !reached {
                return total;
            }
            let mut path = Vec::new();
            let mut v = t;
            while let Some(e) = via[v] {
                path.push(e);
                v = self.edges[e ^ 1].to;
            }
            let push = path.iter().map(|&e| self.edges[e].cap.clone()).min().expect("non-empty path");
            for &e in &path {
                self.edges[e].cap -= &push;
                self.edges[e ^ 1].cap += &push;
            }
            total += push;
        }
    }
}

/// Solves by routing each `r_J` to the elements of `J` and dividing the
/// flow on `J → k` back by `r_J`.
pub fn solve(prob: &AssignmentProblem) -> Solve {
    if let Some(witness) = check(prob) {
        return Solve::Infeasible { witness };
    }
    let n = prob.n();
    let subsets: Vec<(Subset, BigRational)> =
        prob.r.iter().filter(|(_, w)| !w.is_zero()).map(|(m, w)| (*m, w.to_rational())).collect();
    let (source, sink) = (0, 1);
    let elem = |k: usize| 2 + k;
    let subset_node = |i: usize| 2 + n + i;
    let mut net = FlowNet::new(2 + n + subsets.len());
    for k in 0..n {
        net.add(elem(k), sink, prob.p[k].to_rational());
    }
    let mut routes = Vec::new();
    for (i, (mask, w)) in subsets.iter().enumerate() {
        net.add(source, subset_node(i), w.clone());
        for k in (0..n).filter(|k| mask >> k & 1 == 1) {
            let e = net.add(subset_node(i), elem(k), w.clone());
            routes.push((k, *mask, w.clone(), e));
        }
    }
    let flow = net.max_flow(source, sink);
    let demand: BigRational = prob.p.iter().map(Dyadic::to_rational).sum();
    assert!(flow == demand, "covering condition holds, so the flow saturates every demand");
    let mut s = BTreeMap::new();
    for (k, mask, w, e) in routes {
        // flow on the edge equals the residual of its reverse
        let f = net.edges[e ^ 1].cap.clone();
        if !f.is_zero() {
            s.insert((k, mask), f / w);
        }
    }
    Solve::Solved(AssignmentSolution { s })
}
