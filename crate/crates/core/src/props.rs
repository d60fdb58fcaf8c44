//! Executable invariants, checked on generated terms by the test suites
//! and by `plam proptest`.
//!
//! Each check returns `Ok(None)` when the property holds, `Ok(Some(why))`
//! on a violation, and `Err` when an engine hit a resource cap.

use crate::bigstep::BigStep;
use crate::distr::Distr;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::lab::{refute_bisim, refute_sim, replay, GameConfig};
use crate::smallstep::{
    convergence_table, head_step, spine_commutation_witness, spine_step, Caps, Commutation, Strategy,
};
use crate::syntax::{instantiate, is_hnf, parse, print, Node, Term};
use crate::tree::{prob_tree, tree_eq, TreeVerdict};

pub type Verdict = Result<Option<String>>;

fn fail(msg: String) -> Verdict {
    Ok(Some(msg))
}

pub fn print_parse_round_trip(t: &Term) -> Verdict {
    let text = print(t);
    match parse(&text) {
        Ok(back) if &back == t => Ok(None),
        Ok(back) => fail(format!("`{text}` reparses as `{back}`")),
        Err(e) => fail(format!("`{text}` does not reparse: {e}")),
    }
}

/// `eval(t, f) ≤ eval(t, f+1)` and every mass stays within `[0,1]`.
pub fn fuel_monotone(t: &Term, max_fuel: u32) -> Verdict {
    let mut ev = BigStep::new();
    let mut prev = Distr::bottom();
    for f in 0..=max_fuel {
        let cur = ev.eval(t, f)?;
        if cur.mass() > Dyadic::one() {
            return fail(format!("fuel {f}: mass {}", cur.mass()));
        }
        if !prev.leq(&cur) {
            return fail(format!("fuel {f}: {prev} is not below {cur}"));
        }
        prev = cur;
    }
    Ok(None)
}

/// One step of either strategy is a probability distribution on
/// successors; head normal forms step to themselves.
pub fn step_stochastic(t: &Term) -> Verdict {
    for (name, out) in [("head", head_step(t)), ("spine", spine_step(t))] {
        let total = out.total();
        let ok = total == Dyadic::one()
            && out.0.iter().all(|(p, _)| !p.is_zero())
            && (!is_hnf(t) || out.0 == [(Dyadic::one(), t.clone())]);
        if !ok {
            return fail(format!("{name} step has total {total} over {} successors", out.0.len()));
        }
    }
    Ok(None)
}

/// Head and head-spine reduction reach the same hnfs with the same
/// probabilities after every number of steps up to `n`.
pub fn strategies_agree(t: &Term, n: usize) -> Verdict {
    let caps = Caps::default();
    let h = convergence_table(t, n, Strategy::Head, &caps)?;
    let s = convergence_table(t, n, Strategy::Spine, &caps)?;
    match (0..=n).find(|&k| h.row(k) != s.row(k)) {
        None => Ok(None),
        Some(k) => fail(format!("after {k} steps: head {} vs spine {}", h.row(k), s.row(k))),
    }
}

/// Every big-step approximant up to `max_fuel` is below some head
/// reduction prefix, and every prefix of at most `max_steps` steps is below
/// some approximant. Witnesses are searched up to four times the checked
/// bound, since a late prefix can need more fuel than the window holds.
pub fn sandwich(t: &Term, max_fuel: u32, max_steps: usize) -> Verdict {
    let mut ev = BigStep::new();
    let mut evs: Vec<Distr> = (0..=max_fuel).map(|f| ev.eval(t, f)).collect::<Result<_>>()?;
    let mut hs = convergence_table(t, max_steps, Strategy::Head, &Caps::default())?.rows;
    if evs.iter().any(|e| !hs.iter().any(|h| e.leq(h))) {
        hs = convergence_table(t, 4 * max_steps, Strategy::Head, &Caps::default())?.rows;
    }
    if hs[..=max_steps].iter().any(|h| !evs.iter().any(|e| h.leq(e))) {
        for f in max_fuel + 1..=4 * max_fuel {
            evs.push(ev.eval(t, f)?);
        }
    }
    if let Some(f) = evs[..=max_fuel as usize].iter().position(|e| !hs.iter().any(|h| e.leq(h))) {
        return fail(format!("fuel {f} approximant {} exceeds every reduction prefix", evs[f]));
    }
    if let Some(n) = hs[..=max_steps].iter().position(|h| !evs.iter().any(|e| h.leq(e))) {
        return fail(format!("{n}-step prefix {} exceeds every approximant", hs[n]));
    }
    Ok(None)
}

/// Big-step evaluation commutes with abstraction and choice and fixes hnfs.
pub fn eval_identities(t: &Term, max_fuel: u32) -> Verdict {
    let mut ev = BigStep::new();
    for f in 0..=max_fuel {
        let got = ev.eval(t, f)?;
        let want = if is_hnf(t) {
            Distr::point(t.clone())
        } else {
            match t.node() {
                Node::Lam(body) => ev.eval(body, f)?.abstract_lam(),
                Node::Choice(l, r) => {
                    let mut d = Distr::bottom();
                    d.accumulate_scaled(&Dyadic::half(), &ev.eval(l, f)?);
                    d.accumulate_scaled(&Dyadic::half(), &ev.eval(r, f)?);
                    d
                }
                _ => continue,
            }
        };
        if got != want {
            return fail(format!("fuel {f}: {got} vs {want}"));
        }
    }
    Ok(None)
}

/// Firing a head redex costs exactly one step of head reduction:
/// `(λx.m) n` after `k+1` steps equals `m[n/x]` after `k`.
pub fn redex_unfolding(body: &Term, arg: &Term, max_k: usize) -> Verdict {
    let caps = Caps::default();
    let redex = Term::app(Term::lam(body.clone()), arg.clone());
    let a = convergence_table(&redex, max_k + 1, Strategy::Head, &caps)?;
    let b = convergence_table(&instantiate(body, arg), max_k, Strategy::Head, &caps)?;
    match (0..=max_k).find(|&k| a.row(k + 1) != b.row(k)) {
        None => Ok(None),
        Some(k) => fail(format!("k = {k}: {} vs {}", a.row(k + 1), b.row(k))),
    }
}

/// Every spine step is rejoined by head reduction. Witnesses not found
/// within `bound` steps are inconclusive, not failures.
pub fn spine_rejoins_head(t: &Term, bound: usize) -> Verdict {
    let caps = Caps { leaves: 1 << 10, max_term_size: 1 << 10 };
    for (p, succ) in spine_step(t).0 {
        if let Commutation::Found { n0, m0 } = spine_commutation_witness(t, &p, &succ, bound, &caps)? {
            if !crate::smallstep::replay_commutation(t, &p, &succ, n0, &m0, &caps)? {
                return fail(format!("witness ({n0}, {m0}) for {succ} does not replay"));
            }
        }
    }
    Ok(None)
}

/// Equality of trees at a level implies equality at every lower level.
pub fn tree_levels_monotone(a: &Term, b: &Term, max_level: u32, fuel: u32) -> Verdict {
    let mut equal_at = Vec::new();
    for level in 0..=max_level {
        let v = tree_eq(&prob_tree(a, level, fuel)?, &prob_tree(b, level, fuel)?)?;
        equal_at.push(v == TreeVerdict::Equal);
    }
    match (1..equal_at.len()).find(|&l| equal_at[l] && !equal_at[l - 1]) {
        None => Ok(None),
        Some(l) => fail(format!("equal at level {l} but not at level {}", l - 1)),
    }
}

/// Any trace the games return replays, and a term is never refuted
/// against itself.
pub fn game_certificates_replay(a: &Term, b: &Term, cfg: &GameConfig) -> Verdict {
    for self_pair in [a, b] {
        if refute_bisim(self_pair, self_pair, cfg.clone())?.is_some() {
            return fail(format!("{self_pair} refuted against itself"));
        }
    }
    let traces = [refute_bisim(a, b, cfg.clone())?, refute_sim(a, b, cfg.clone())?, refute_sim(b, a, cfg.clone())?];
    for (i, tr) in traces.iter().enumerate() {
        if let Some(tr) = tr {
            let (l, r) = if i == 2 { (b, a) } else { (a, b) };
            if !replay(l, r, tr, cfg.clone())? {
                return fail(format!("{} trace does not replay: {}", tr.relation.name(), tr.to_json()));
            }
        }
    }
    Ok(None)
}

/// If `a`'s approximant at `fuel` is certainly below `b`'s and `a` has
/// nothing left to produce, `a ≾ b` must not be refuted.
pub fn below_is_not_refuted(a: &Term, b: &Term, fuel: u32, cfg: &GameConfig) -> Verdict {
    let mut ev = BigStep::new();
    let (da, db) = (ev.eval(a, fuel)?, ev.eval(b, fuel)?);
    if da.mass() == Dyadic::one() && da.leq(&db) {
        if let Some(tr) = refute_sim(a, b, cfg.clone())? {
            return fail(format!("refuted despite {da} ≤ {db}: {}", tr.to_json()));
        }
    }
    Ok(None)
}
