//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p plam-core --test acceptance`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use plam_core::bigstep::eval_fuel;
use plam_core::gen::{corpus, GenConfig, TermGen};
use plam_core::lab::assign::{check, solve, AssignmentProblem, Solve, Subset};
use plam_core::lab::{
    applicative_compare, refute_bisim, refute_sim, replay, sequences, AppVerdict, GameConfig, TransitionLabel,
};
use plam_core::props;
use plam_core::smallstep::{head_step, step_n, Strategy};
use plam_core::syntax::{abstract_free, parse};
use plam_core::tree::{prob_tree, tree_eq, HeadRef, TreeVerdict};
use plam_core::{Distr, Dyadic, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn p(s: &str) -> Term {
    parse(s).unwrap()
}

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

fn distr(pairs: &[(&str, &str)]) -> Distr {
    Distr::from_pairs(pairs.iter().map(|(a, b)| (p(a), d(b)))).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn test_corpus() -> Vec<Term> {
    corpus(2024, 500, GenConfig::closed(12))
}

fn duplicated_coin() -> Outcome {
    let start = Instant::now();
    let want = distr(&[("\\y.T", "1/4"), ("\\y.F", "1/4"), ("I", "1/2")]);
    for fuel in 2..=16 {
        let r = eval_fuel(&p("Delta (T (+) F)"), fuel).map_err(|e| e.to_string())?;
        ensure(r.distr == want && r.deficit.is_zero(), || format!("fuel {fuel}: {} deficit {}", r.distr, r.deficit))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{want}, deficit 0, fuel 2..16"))
}

fn divergence() -> Outcome {
    let start = Instant::now();
    for fuel in 0..=32 {
        let r = eval_fuel(&p("Omega"), fuel).map_err(|e| e.to_string())?;
        ensure(r.distr.is_empty() && r.deficit.is_one(), || format!("Omega at fuel {fuel}: {}", r.distr))?;
        if fuel >= 1 {
            let h = eval_fuel(&p("Omega (+) I"), fuel).map_err(|e| e.to_string())?;
            ensure(h.distr == distr(&[("I", "1/2")]), || format!("Omega (+) I at fuel {fuel}: {}", h.distr))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("Omega is bottom for fuel 0..32, Omega (+) I is 1/2·I".into())
}

fn almost_sure_termination() -> Outcome {
    let mm = p("(\\x.y (+) x x) (\\x.y (+) x x)");
    for n in 1..=12u32 {
        // Σ_{i=1..n} 2^-i
        let want: Dyadic = (1..=n).map(Dyadic::pow2_inv).sum();
        let got = eval_fuel(&mm, n).map_err(|e| e.to_string())?.distr;
        ensure(got == Distr::weighted(p("y"), want.clone()), || format!("fuel {n}: {got}, want {want}·y"))?;
    }
    Ok("fuel n gives (1 - 2^-n)·y for n = 1..12".into())
}

fn applicative_separation() -> Outcome {
    let (m, n) = (p("\\x y z.z (x (+) y)"), p("\\x y z.z x (+) z y"));
    for fuel in 5..=12 {
        let a = eval_fuel(&Term::apps(m.clone(), [p("Omega"), p("I"), p("Delta")]), fuel).map_err(|e| e.to_string())?;
        let b = eval_fuel(&Term::apps(n.clone(), [p("Omega"), p("I"), p("Delta")]), fuel).map_err(|e| e.to_string())?;
        ensure(a.distr == distr(&[("I", "1/4")]) && b.distr == distr(&[("I", "1/2")]), || {
            format!("fuel {fuel}: {} vs {}", a.distr, b.distr)
        })?;
    }
    let rep = applicative_compare(&m, &n, &[vec![p("Omega"), p("I"), p("Delta")]], 5).map_err(|e| e.to_string())?;
    let row = &rep.rows[0];
    ensure(row.verdict == AppVerdict::RightExceeds, || format!("verdict {:?}", row.verdict))?;
    Ok(format!("1/4 vs 1/2 at fuel 5..12, appcmp {}", row.verdict.name()))
}

// Probability of reaching each hnf within `n` steps, enumerating every
// reduction path separately (no merging of equal states).
fn path_oracle(t: &Term, n: usize, w: Dyadic, out: &mut Distr) {
    let succ = head_step(t);
    if succ.0.len() == 1 && &succ.0[0].1 == t && plam_core::syntax::is_hnf(t) {
        out.accumulate(t.clone(), w);
        return;
    }
    if n == 0 {
        return;
    }
    for (q, s) in succ.0 {
        path_oracle(&s, n - 1, &w * &q, out);
    }
}

fn strategies_agree() -> Outcome {
    let start = Instant::now();
    let terms = test_corpus();
    for t in &terms {
        for n in 0..=8 {
            let h = step_n(t, n, Strategy::Head).map_err(|e| e.to_string())?;
            let s = step_n(t, n, Strategy::Spine).map_err(|e| e.to_string())?;
            ensure(h == s, || format!("{t} after {n}: head {h} vs spine {s}"))?;
            if n == 8 {
                let mut o = Distr::bottom();
                path_oracle(t, n, Dyadic::one(), &mut o);
                ensure(o == h, || format!("{t}: path enumeration {o} vs {h}"))?;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{} terms, n <= 8, {:?}", terms.len(), start.elapsed()))
}

fn sandwich() -> Outcome {
    let terms = test_corpus();
    for t in &terms {
        if let Some(why) = props::sandwich(t, 8, 24).map_err(|e| e.to_string())? {
            return Err(format!("{t}: {why}"));
        }
    }
    Ok(format!("{} terms, f <= 8, n <= 24", terms.len()))
}

fn redex_unfolding() -> Outcome {
    let mut bodies = TermGen::new(77, GenConfig::open(10, &["x"]));
    let mut args = TermGen::new(78, GenConfig::closed(8));
    let mut checked = 0;
    while checked < 200 {
        let body = abstract_free(&bodies.term(), "x");
        let arg = args.term();
        match props::redex_unfolding(&body, &arg, 8) {
            Ok(None) => checked += 1,
            Ok(Some(why)) => return Err(format!("(λx.{body}) {arg}: {why}")),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok("200 redexes, k <= 8".into())
}

fn evaluation_identities() -> Outcome {
    let terms = test_corpus();
    for t in &terms {
        if let Some(why) = props::eval_identities(t, 12).map_err(|e| e.to_string())? {
            return Err(format!("{t}: {why}"));
        }
    }
    Ok(format!("{} terms, fuel 0..12", terms.len()))
}

fn fixed_point_trees() -> Outcome {
    let m = p("Theta (\\f.y (+) y f)");
    let y = HeadRef::Free("y".into());
    let l1 = prob_tree(&m, 1, 12).map_err(|e| e.to_string())?;
    ensure(l1.deficit.is_zero() && l1.weights.len() == 1, || l1.render())?;
    let (vt, w) = l1.weights.iter().next().unwrap();
    ensure(w.is_one() && vt.head == y && vt.binders == 0 && vt.args.is_empty(), || l1.render())?;

    let l2 = prob_tree(&m, 2, 12).map_err(|e| e.to_string())?;
    ensure(l2.deficit.is_zero() && l2.weights.len() == 2, || l2.render())?;
    let mut arities: Vec<usize> = Vec::new();
    for (vt, w) in &l2.weights {
        ensure(*w == Dyadic::half() && vt.head == y && vt.binders == 0, || l2.render())?;
        arities.push(vt.args.len());
        for child in &vt.args {
            ensure(child.weights.len() == 1 && child.deficit.is_zero(), || l2.render())?;
            let (cvt, cw) = child.weights.iter().next().unwrap();
            ensure(cw.is_one() && cvt.head == y, || l2.render())?;
        }
    }
    arities.sort();
    ensure(arities == [0, 1], || l2.render())?;
    Ok("level 1: 1 on λx1x2….y; level 2: 1/2 on λ….y and 1/2 on λ….y with child λ….y".into())
}

fn eta_and_levels() -> Outcome {
    for (a, b) in [("y", "\\z.y z"), ("I", "\\x y.x y")] {
        for level in 1..=4 {
            let ta = prob_tree(&p(a), level, 8).map_err(|e| e.to_string())?;
            let tb = prob_tree(&p(b), level, 8).map_err(|e| e.to_string())?;
            let v = tree_eq(&ta, &tb).map_err(|e| e.to_string())?;
            ensure(v == TreeVerdict::Equal, || format!("{a} vs {b} at level {level}: {v:?}"))?;
        }
    }
    let terms = test_corpus();
    let mut pairs = 0;
    for w in terms.chunks(2) {
        if let Some(why) = props::tree_levels_monotone(&w[0], &w[1], 4, 8).map_err(|e| e.to_string())? {
            return Err(format!("{} vs {}: {why}", w[0], w[1]));
        }
        pairs += 1;
    }
    Ok(format!("η-pairs equal at levels 1..4; level monotonicity on {pairs} pairs"))
}

fn argument_choice() -> Outcome {
    let (m, n) = (p("\\x.x (Omega (+) I)"), p("\\x.x Omega (+) x I"));
    let cfg = GameConfig { depth: 6, pool: vec![p("I")], ..GameConfig::default() };
    let mn = refute_sim(&m, &n, cfg.clone()).map_err(|e| e.to_string())?.ok_or("M ≾ N not refuted")?;
    let nm = refute_sim(&n, &m, cfg.clone()).map_err(|e| e.to_string())?.ok_or("N ≾ M not refuted")?;
    let (a, b) = (&mn.separation, &nm.separation);
    ensure(a.left.lower == Dyadic::half() && a.right.upper.is_zero(), || format!("{}", mn.to_json()))?;
    ensure(b.left.lower.is_one() && b.right.upper == Dyadic::half(), || format!("{}", nm.to_json()))?;
    ensure(replay(&m, &n, &mn, cfg.clone()).map_err(|e| e.to_string())?, || "M ≾ N trace does not replay".into())?;
    ensure(replay(&n, &m, &nm, cfg).map_err(|e| e.to_string())?, || "N ≾ M trace does not replay".into())?;
    let seqs = sequences(&[p("I"), p("Omega"), p("Delta")], 3);
    let rep = applicative_compare(&m, &n, &seqs, 12).map_err(|e| e.to_string())?;
    ensure(!rep.any(AppVerdict::LeftExceeds), || "some context certifies M above N".into())?;
    Ok(format!(
        "sim refuted both ways ({} labels each), 1/2 vs 0 and 1 vs 1/2; {} contexts, none LeftExceeds",
        mn.labels().len(),
        rep.rows.len()
    ))
}

fn stored_choice_bisim() -> Outcome {
    let (m, n) = (p("\\x y z.z (x (+) y)"), p("\\x y z.z x (+) z y"));
    let mut notes = Vec::new();
    for pool in [vec![p("Omega"), p("I")], GameConfig::default().pool] {
        let cfg = GameConfig { depth: 8, pool, ..GameConfig::default() };
        let tr = refute_bisim(&m, &n, cfg.clone()).map_err(|e| e.to_string())?.ok_or("not distinguished")?;
        ensure(tr.labels().len() <= 8, || "trace too long".into())?;
        ensure(replay(&m, &n, &tr, cfg).map_err(|e| e.to_string())?, || "trace does not replay".into())?;
        let args: Vec<String> =
            tr.labels().iter().filter(|l| **l != TransitionLabel::Tau).map(|l| l.to_string()).collect();
        notes.push(format!("[{}] {} vs {}", args.join(", "), tr.separation.left.lower, tr.separation.right.upper));
    }
    let none = refute_bisim(&p("I"), &p("\\x y.x y"), GameConfig::default()).map_err(|e| e.to_string())?;
    ensure(none.is_none(), || "I vs its η-expansion refuted".into())?;
    Ok(format!("{}; I vs λxy.xy: none", notes.join("; ")))
}

// ---- assignment oracles ----

fn units(x: &Dyadic, step: u32) -> usize {
    let scaled = x.to_rational() * BigRational::from_integer((1u64 << step).into());
    assert!(scaled.is_integer());
    scaled.to_integer().try_into().unwrap()
}

/// Brute-force feasibility in grid units: distribute each subset's
/// units over its members in every possible way, tracking the set of
/// reachable remaining-demand vectors.
fn brute_feasible(pb: &AssignmentProblem, step: u32) -> bool {
    let n = pb.n();
    let start: Vec<usize> = pb.p.iter().map(|x| units(x, step)).collect();
    let mut states: BTreeSet<Vec<usize>> = BTreeSet::from([start]);
    for (&mask, w) in &pb.r {
        let members: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        let total = units(w, step);
        let mut next = BTreeSet::new();
        for s in &states {
            spread(&members, total, s.clone(), &mut next);
        }
        states = next;
    }
    states.iter().any(|s| s.iter().all(|&x| x == 0))
}

fn spread(members: &[usize], left: usize, state: Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
    match members {
        [] => {
            out.insert(state);
        }
        [k, rest @ ..] => {
            // giving a member more than it still needs is never useful
            for give in 0..=left.min(state[*k]) {
                let mut s = state.clone();
                s[*k] -= give;
                spread(rest, left - give, s, out);
            }
        }
    }
}

/// Both share conditions, checked from the definitions.
fn conditions_hold(pb: &AssignmentProblem, s: &BTreeMap<(usize, Subset), BigRational>) -> bool {
    let one = BigRational::from_integer(1.into());
    let mut per_subset: HashMap<Subset, BigRational> = HashMap::new();
    let mut per_elem = vec![BigRational::zero(); pb.n()];
    for (&(k, mask), v) in s {
        if mask >> k & 1 == 0 || *v < BigRational::zero() || *v > one {
            return false;
        }
        *per_subset.entry(mask).or_insert_with(BigRational::zero) += v;
        per_elem[k] += v * pb.r_of(mask).to_rational();
    }
    per_subset.values().all(|t| *t <= one) && (0..pb.n()).all(|k| pb.p[k].to_rational() <= per_elem[k])
}

fn grid_instances(n: usize, step: u32, out: &mut Vec<AssignmentProblem>) {
    let m = (1usize << n) - 1;
    let vals = (1usize << step) + 1;
    let count = vals.pow((n + m) as u32);
    for mut code in 0..count {
        let mut digits = Vec::with_capacity(n + m);
        for _ in 0..n + m {
            digits.push(Dyadic::new((code % vals) as u64, step));
            code /= vals;
        }
        let r: BTreeMap<Subset, Dyadic> =
            (1..=m as u32).zip(digits[n..].iter().cloned()).filter(|(_, w)| !w.is_zero()).collect();
        out.push(AssignmentProblem::new(digits[..n].to_vec(), r).unwrap());
    }
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, step: u32, feasible: bool) -> AssignmentProblem {
    let grid = 1u64 << step;
    let mut r = BTreeMap::new();
    let mut budget = grid;
    let mut p = vec![0u64; n];
    let subsets: usize = rng.gen_range(1..=4);
    for _ in 0..subsets {
        let mask: Subset = rng.gen_range(1..1u32 << n);
        let w = rng.gen_range(0..=budget);
        budget -= w;
        *r.entry(mask).or_insert(0) += w;
        // route the subset's mass to its members
        let members: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        let mut left = w;
        for (i, k) in members.iter().enumerate() {
            let give = if i + 1 == members.len() { left } else { rng.gen_range(0..=left) };
            p[*k] += give;
            left -= give;
        }
    }
    if !feasible {
        let k = rng.gen_range(0..n);
        p[k] = (p[k] + 1).min(grid);
    }
    let p = p.into_iter().map(|x| Dyadic::new(x, step)).collect();
    let r = r.into_iter().filter(|(_, w)| *w > 0).map(|(m, w)| (m, Dyadic::new(w, step))).collect();
    AssignmentProblem::new(p, r).unwrap()
}

fn assignments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for i in 0..100 {
        let n = 1 + i % 6;
        let pb = random_instance(&mut rng, n, 4, true);
        match solve(&pb) {
            Solve::Solved(sol) => ensure(conditions_hold(&pb, &sol.s), || format!("bad shares for {}", pb.to_json()))?,
            Solve::Infeasible { .. } => return Err(format!("feasible instance rejected: {}", pb.to_json())),
        }
    }
    let mut grid = Vec::new();
    grid_instances(1, 3, &mut grid);
    grid_instances(2, 3, &mut grid);
    grid_instances(3, 1, &mut grid);
    for _ in 0..5_000 {
        let feasible = rng.gen_bool(0.5);
        grid.push(random_instance(&mut rng, 3, 3, feasible));
    }
    let step_of = |pb: &AssignmentProblem| {
        if pb.n() == 3 && pb.p.iter().chain(pb.r.values()).all(|x| x.exponent() <= 1) {
            1
        } else {
            3
        }
    };
    let mut feasible = 0;
    for pb in &grid {
        let oracle = brute_feasible(pb, step_of(pb));
        let got = solve(pb);
        ensure(oracle == matches!(got, Solve::Solved(_)), || format!("disagreement on {}", pb.to_json()))?;
        ensure(oracle == check(pb).is_none(), || format!("check disagrees on {}", pb.to_json()))?;
        if let Solve::Solved(sol) = got {
            feasible += 1;
            ensure(conditions_hold(pb, &sol.s), || format!("bad shares for {}", pb.to_json()))?;
        }
    }
    Ok(format!("100 random feasible n <= 6 solved exactly; {} grid instances agree ({feasible} feasible)", grid.len()))
}

fn property_suite() -> Outcome {
    let cfg = GameConfig::default();
    let mut traces = 0;
    let mut gen_a = TermGen::new(5, GenConfig::closed(12));
    let mut gen_b = TermGen::new(6, GenConfig::open(12, &["x", "y"]));
    for _ in 0..1000 {
        let (a, b, o) = (gen_a.term(), gen_a.term(), gen_b.term());
        for (name, v) in [
            ("fuel monotonicity", props::fuel_monotone(&a, 8)),
            ("step stochasticity", props::step_stochastic(&a)),
            ("step stochasticity", props::step_stochastic(&o)),
            ("print/parse round trip", props::print_parse_round_trip(&a)),
            ("print/parse round trip", props::print_parse_round_trip(&o)),
            ("game certificates replay", props::game_certificates_replay(&a, &b, &cfg)),
        ] {
            match v {
                Ok(None) => {}
                Ok(Some(why)) => return Err(format!("{name} on {a} / {b} / {o}: {why}")),
                Err(e) => return Err(format!("{name}: {e}")),
            }
        }
        if refute_bisim(&a, &b, cfg.clone()).map_err(|e| e.to_string())?.is_some() {
            traces += 1;
        }
    }
    Ok(format!("1000 cases per property; {traces} bisimulation certificates replayed"))
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("duplicated coin evaluates exactly", duplicated_coin),
        ("divergence and half-divergence", divergence),
        ("almost-sure termination of MM", almost_sure_termination),
        ("applicative separation 1/4 vs 1/2", applicative_separation),
        ("head and spine reduction agree", strategies_agree),
        ("big-step and head reduction sandwich", sandwich),
        ("firing a redex costs one step", redex_unfolding),
        ("evaluation identities", evaluation_identities),
        ("fixed-point coin trees", fixed_point_trees),
        ("η-invariance and level monotonicity", eta_and_levels),
        ("argument-choice pair: sim refutations and contexts", argument_choice),
        ("stored-choice bisimulation refutation", stored_choice_bisim),
        ("assignment solver", assignments),
        ("property suite", property_suite),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let ms = start.elapsed().as_millis();
        match out {
            Ok(detail) => println!("PASS  {name}: {detail} [{ms} ms]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{ms} ms]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
