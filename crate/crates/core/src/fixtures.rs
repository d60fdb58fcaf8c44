//! The catalogue of worked examples the toolkit must reproduce exactly.
//!
//! Every fixture that evaluates a term goes through the evaluator handed
//! to [`run_with`], so a faulty evaluator is caught by the catalogue.

use serde_json::{json, Value};

use crate::bigstep::{check_big_step_derivable, BigStep, Derivability};
use crate::distr::Distr;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::lab::{
    applicative_compare, refute_bisim, refute_sim, sequences, transitions, AppVerdict, GameConfig, MarkovState,
    TransitionLabel,
};
use crate::smallstep::{h_inf_lower, head_step, spine_step, step_n, Strategy};
use crate::syntax::{alpha_eq, classify, constant, free_vars, instantiate, parse, Redex, Shape, Term};
use crate::tree::{prob_tree, tree_eq, TreeVerdict};

/// Evaluator under test: term and fuel to a head distribution.
pub type Evaluator<'a> = dyn FnMut(&Term, u32) -> Result<Distr> + 'a;

#[derive(Clone, Debug)]
pub struct FixtureOutcome {
    pub name: String,
    pub passed: bool,
    /// What was observed, for failure reports.
    pub detail: String,
}

impl FixtureOutcome {
    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "passed": self.passed, "detail": self.detail})
    }
}

fn t(s: &str) -> Term {
    parse(s).expect("fixture terms parse")
}

fn d(s: &str) -> Dyadic {
    s.parse().expect("fixture weights parse")
}

fn distr(pairs: &[(&str, &str)]) -> Distr {
    Distr::from_pairs(pairs.iter().map(|(a, b)| (t(a), d(b)))).expect("fixture distributions are subprobabilities")
}

const M_MM: &str = "(\\x.y (+) x x) (\\x.y (+) x x)";
const M_STORE: &str = "\\x y z.z (x (+) y)";
const N_STORE: &str = "\\x y z.z x (+) z y";
const M_ARG: &str = "\\x.x (Omega (+) I)";
const N_ARG: &str = "\\x.x Omega (+) x I";

struct Runner<'e, 'a> {
    eval: &'e mut Evaluator<'a>,
    out: Vec<FixtureOutcome>,
}

impl Runner<'_, '_> {
    fn record(&mut self, name: &str, r: Result<(bool, String)>) {
        let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.out.push(FixtureOutcome { name: name.to_string(), passed, detail });
    }

    fn check(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        self.record(name, f());
    }

    fn eval_is(&mut self, name: &str, term: &str, fuels: impl IntoIterator<Item = u32>, want: &Distr) {
        let m = t(term);
        let mut r = Ok((true, format!("{want}")));
        for f in fuels {
            match (self.eval)(&m, f) {
                Ok(got) if &got == want => {}
                Ok(got) => {
                    r = Ok((false, format!("fuel {f}: got {got}, want {want}")));
                    break;
                }
                Err(e) => {
                    r = Err(e);
                    break;
                }
            }
        }
        self.record(name, r);
    }
}

/// Runs the catalogue with the library's big-step evaluator.
pub fn run() -> Vec<FixtureOutcome> {
    let mut ev = BigStep::new();
    run_with(&mut |m: &Term, f: u32| ev.eval(m, f))
}

pub fn run_with(eval: &mut Evaluator<'_>) -> Vec<FixtureOutcome> {
    let mut r = Runner { eval, out: Vec::new() };
    let coin = t("Delta (T (+) F)");
    let coin_sem = distr(&[("\\y.T", "1/4"), ("\\y.F", "1/4"), ("I", "1/2")]);

    r.check("duplicator parses to λx.xx", || {
        let got = t("\\x.x x");
        Ok((Some(&got) == constant("Delta").as_ref(), got.to_string()))
    });
    r.check("boolean coin parses to a choice", || {
        let got = t("(\\x.\\y.x) (+) (\\x.\\y.y)");
        Ok((got == Term::choice(t("T"), t("F")), got.to_string()))
    });
    r.check("substituting a coin into xx", || {
        let body = t("\\x.x x").as_lam().cloned().expect("abstraction");
        let got = instantiate(&body, &t("T (+) F"));
        Ok((got == t("(T (+) F) (T (+) F)"), got.to_string()))
    });
    r.check("Omega is a head β-redex", || {
        let ok = matches!(classify(&t("Omega")), Shape::Redex(ref c, Redex::Beta { .. }) if c.binders == 0 && c.spine_args.is_empty());
        Ok((ok, format!("{:?}", classify(&t("Omega")))))
    });
    r.check("free variables of stored choice and MM", || {
        let a: Vec<String> = free_vars(&t("\\z.z (x (+) y)")).iter().map(|n| n.to_string()).collect();
        let b: Vec<String> = free_vars(&t(M_MM)).iter().map(|n| n.to_string()).collect();
        Ok((a == ["x", "y"] && b == ["y"], format!("{a:?} {b:?}")))
    });
    r.check("identity and its η-expansion are distinct terms", || {
        Ok((!alpha_eq(&t("\\x.x"), &t("\\x y.x y")), String::new()))
    });
    r.check("distribution arithmetic", || {
        let half_i = Distr::point(t("I")).scale(&Dyadic::half());
        let sum = distr(&[("y", "1/2")]).add(&distr(&[("y", "1/4")]))?;
        let ok = half_i == distr(&[("I", "1/2")])
            && sum == distr(&[("y", "3/4")])
            && coin_sem.mass() == Dyadic::one()
            && distr(&[("I", "1/4")]).mass() == d("1/4")
            && Distr::bottom().leq(&coin_sem);
        Ok((ok, format!("{half_i}; {sum}")))
    });

    r.eval_is("duplicated coin evaluates to its supremum", "Delta (T (+) F)", 2..=6, &coin_sem);
    let on_i = (r.eval)(&coin, 4).map(|got| {
        let w = got.restrict(|h| *h == t("I"));
        (w == Dyadic::half(), w.to_string())
    });
    r.record("duplicated coin puts 1/2 on I", on_i);
    r.eval_is("Omega evaluates to nothing", "Omega", 0..=10, &Distr::bottom());
    for n in 1..=12u32 {
        let want = Distr::weighted(t("y"), Dyadic::one().checked_sub(&Dyadic::pow2_inv(n)).expect("below 1"));
        r.eval_is(&format!("MM at fuel {n}"), M_MM, [n], &want);
    }
    r.eval_is(
        "stored choice applied to Omega, I, Delta",
        &format!("({M_STORE}) Omega I Delta"),
        5..=9,
        &distr(&[("I", "1/4")]),
    );
    r.eval_is(
        "distributed choice applied to Omega, I, Delta",
        &format!("({N_STORE}) Omega I Delta"),
        5..=9,
        &distr(&[("I", "1/2")]),
    );
    r.eval_is("Omega (+) I evaluates to half of I", "Omega (+) I", 1..=4, &distr(&[("I", "1/2")]));
    r.eval_is(
        "duplicating context over a choice",
        "(\\v.(v I Omega) (v I Omega)) (\\x y.x (+) y)",
        4..=8,
        &distr(&[("I", "1/4")]),
    );
    r.check("half of I is a derivable approximant of the duplicated coin", || {
        let v = check_big_step_derivable(&coin, &distr(&[("I", "1/2")]), 8)?;
        Ok((v == Derivability::Derivable, format!("{v:?}")))
    });
    r.check("nothing positive is derivable for Omega", || {
        let v = check_big_step_derivable(&t("Omega"), &distr(&[("I", "1/4")]), 16)?;
        Ok((v != Derivability::Derivable, format!("{v:?}")))
    });

    r.check("head step on an idempotent choice", || {
        let s = head_step(&t("x (+) x"));
        Ok((s.0 == vec![(Dyadic::one(), t("x"))], format!("{:?}", s.0)))
    });
    r.check("head step on a coin", || {
        let s = head_step(&t("T (+) F"));
        Ok((s.0 == vec![(Dyadic::half(), t("T")), (Dyadic::half(), t("F"))], format!("{:?}", s.0)))
    });
    r.check("head step fires the outermost redex", || {
        let s = head_step(&t("(\\x.(\\y.x) y) z"));
        Ok((s.0 == vec![(Dyadic::one(), t("(\\w.z) y"))], format!("{:?}", s.0)))
    });
    r.check("spine step normalizes the function first", || {
        let s = spine_step(&t("(\\x.(\\y.x) y) z"));
        Ok((s.0 == vec![(Dyadic::one(), t("(\\x.x) z"))], format!("{:?}", s.0)))
    });
    r.check("two head steps of Omega (+) I", || {
        let got = step_n(&t("Omega (+) I"), 2, Strategy::Head)?;
        Ok((got == distr(&[("I", "1/2")]), got.to_string()))
    });
    r.check("head-reduction semantics of Omega and the duplicated coin", || {
        let a = h_inf_lower(&t("Omega"), 12)?;
        let b = h_inf_lower(&coin, 4)?;
        Ok((a.distr.is_empty() && b.distr == coin_sem, format!("{} ; {}", a.distr, b.distr)))
    });

    r.check("η-pair has one tree", || {
        for level in 1..=4 {
            let a = prob_tree(&t("\\z.y z"), level, 8)?;
            let b = prob_tree(&t("y"), level, 8)?;
            if a != b {
                return Ok((false, format!("level {level}: {} vs {}", a.render(), b.render())));
            }
        }
        Ok((true, String::new()))
    });
    r.check("fixed point of a coin, level 1", || {
        let got = prob_tree(&t("Theta (\\f.y (+) y f)"), 1, 8)?.render();
        Ok((got == "1: λ….y\n", got))
    });
    r.check("fixed point of a coin, level 2", || {
        let got = prob_tree(&t("Theta (\\f.y (+) y f)"), 2, 8)?.render();
        Ok((got == "1/2: λ….y\n1/2: λ….y\n  1: λ….y\n", got))
    });
    r.check("identity and its η-expansion have equal trees", || {
        for level in 1..=4 {
            let v = tree_eq(&prob_tree(&t("I"), level, 8)?, &prob_tree(&t("\\x y.x y"), level, 8)?)?;
            if v != TreeVerdict::Equal {
                return Ok((false, format!("level {level}: {:?}", v)));
            }
        }
        Ok((true, String::new()))
    });
    r.check("MM and y agree up to missing mass", || {
        let v = tree_eq(&prob_tree(&t(M_MM), 2, 10)?, &prob_tree(&t("y"), 2, 10)?)?;
        Ok((matches!(v, TreeVerdict::Unknown { ref bound } if *bound == Dyadic::pow2_inv(10)), format!("{v:?}")))
    });

    r.check("τ out of a coin", || {
        let got = transitions(&MarkovState::Term(t("T (+) F")), &TransitionLabel::Tau, &mut BigStep::new(), 1)?;
        let ok = got.len() == 2
            && got.get(&MarkovState::Hnf(t("T").as_lam().cloned().expect("abstraction"))) == Some(&Dyadic::half())
            && got.get(&MarkovState::Hnf(t("F").as_lam().cloned().expect("abstraction"))) == Some(&Dyadic::half());
        Ok((ok, format!("{got:?}")))
    });
    r.check("applying νx.x(Ω⊕I) to I", || {
        let body = t(M_ARG).as_lam().cloned().expect("abstraction");
        let got = transitions(&MarkovState::Hnf(body), &TransitionLabel::Apply(t("I")), &mut BigStep::new(), 1)?;
        let want = [(MarkovState::Term(t("I (Omega (+) I)")), Dyadic::one())];
        Ok((got.into_iter().eq(want), String::new()))
    });

    let pool = |names: &[&str]| names.iter().map(|n| t(n)).collect::<Vec<_>>();
    r.check("stored and distributed choice are not bisimilar", || {
        let cfg = GameConfig { depth: 8, pool: pool(&["Omega", "I"]), ..GameConfig::default() };
        let tr = refute_bisim(&t(M_STORE), &t(N_STORE), cfg)?;
        Ok(match tr {
            Some(tr) => {
                let s = &tr.separation;
                let labels: Vec<String> = tr.labels().iter().map(|l| l.to_string()).collect();
                let ok = tr.labels().iter().filter(|l| **l != TransitionLabel::Tau).cloned().collect::<Vec<_>>()
                    == [
                        TransitionLabel::Apply(t("Omega")),
                        TransitionLabel::Apply(t("I")),
                        TransitionLabel::Apply(t("I")),
                    ]
                    && s.left.lower == Dyadic::half()
                    && s.right.upper.is_zero();
                (ok, labels.join(" "))
            }
            None => (false, "no trace".into()),
        })
    });
    r.check("identity is not refuted against its η-expansion", || {
        let tr = refute_bisim(&t("I"), &t("\\x y.x y"), GameConfig::default())?;
        Ok((tr.is_none(), String::new()))
    });
    r.check("argument-choice pair is not bisimilar", || {
        let cfg = GameConfig { depth: 4, pool: pool(&["I"]), ..GameConfig::default() };
        let tr = refute_bisim(&t(M_ARG), &t(N_ARG), cfg)?;
        Ok(match tr {
            Some(tr) => {
                let (l, r) = (&tr.separation.left, &tr.separation.right);
                let ok = (l.lower == Dyadic::half() && r.upper.is_zero())
                    || (l.upper == Dyadic::half() && r.lower == Dyadic::one());
                (ok, tr.to_json().to_string())
            }
            None => (false, "no trace".into()),
        })
    });
    r.check("argument-choice pair: neither simulates the other", || {
        let cfg = GameConfig { depth: 6, pool: pool(&["I"]), ..GameConfig::default() };
        let mn = refute_sim(&t(M_ARG), &t(N_ARG), cfg.clone())?;
        let nm = refute_sim(&t(N_ARG), &t(M_ARG), cfg)?;
        let ok = matches!(&mn, Some(tr) if tr.separation.left.lower == Dyadic::half() && tr.separation.right.upper.is_zero())
            && matches!(&nm, Some(tr) if tr.separation.left.lower == Dyadic::one() && tr.separation.right.upper == Dyadic::half());
        Ok((ok, format!("{} / {}", mn.is_some(), nm.is_some())))
    });
    r.check("applicative context separates stored and distributed choice", || {
        let rep = applicative_compare(&t(M_STORE), &t(N_STORE), &[pool(&["Omega", "I", "Delta"])], 5)?;
        let row = &rep.rows[0];
        let ok =
            row.left.lower == d("1/4") && row.right.lower == Dyadic::half() && row.verdict == AppVerdict::RightExceeds;
        Ok((ok, format!("{} vs {}", row.left.lower, row.right.lower)))
    });
    r.check("argument-choice pair is never contextually above", || {
        let seqs = sequences(&pool(&["I", "Omega", "Delta"]), 3);
        let rep = applicative_compare(&t(M_ARG), &t(N_ARG), &seqs, 12)?;
        Ok((!rep.any(AppVerdict::LeftExceeds), format!("{} sequences", rep.rows.len())))
    });
    r.out
}
