//! Fuel-bounded big-step evaluation to distributions of head normal forms.
//!
//! Fuel counts only the continuation step of an application: evaluating
//! `H[N/x]` after the function part produced `λx.H`. Abstraction, choice
//! and variables are free. With no fuel left the continuation contributes
//! nothing, which is the "give up" rule. The result for a fixed fuel is the
//! largest approximant derivable under that policy.

use std::collections::HashMap;

use serde_json::Value;

use crate::distr::Distr;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::syntax::{classify, instantiate, Node, Shape, Term};

/// Largest term the evaluators will build before giving up.
pub const DEFAULT_MAX_TERM_SIZE: u32 = 1 << 18;

/// A finite lower approximation of the semantics of a term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult {
    pub distr: Distr,
    pub deficit: Dyadic,
}

impl EvalResult {
    pub fn new(distr: Distr) -> EvalResult {
        let deficit = distr.mass().complement();
        EvalResult { distr, deficit }
    }

    pub fn mass(&self) -> Dyadic {
        self.distr.mass()
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.distr.to_json();
        v["deficit"] = Value::String(self.deficit.to_string());
        v
    }
}

/// Memoising evaluator. Reusing one instance across calls shares work
/// between fuels and subterms; results are identical to fresh evaluation.
pub struct BigStep {
    memo: HashMap<(Term, u32), Distr>,
    max_term_size: u32,
}

impl Default for BigStep {
    fn default() -> Self {
        BigStep::new()
    }
}

impl BigStep {
    pub fn new() -> BigStep {
        BigStep { memo: HashMap::new(), max_term_size: DEFAULT_MAX_TERM_SIZE }
    }

    pub fn with_max_term_size(mut self, n: u32) -> BigStep {
        self.max_term_size = n;
        self
    }

    pub fn eval(&mut self, t: &Term, fuel: u32) -> Result<Distr> {
        match t.node() {
            Node::Var(_) => Ok(Distr::point(t.clone())),
            Node::Lam(b) => Ok(self.eval(b, fuel)?.abstract_lam()),
            Node::Choice(l, r) => {
                let mut out = self.eval(l, fuel)?.scale(&Dyadic::half());
                out.accumulate_scaled(&Dyadic::half(), &self.eval(r, fuel)?);
                Ok(out)
            }
            Node::App(m, n) => {
                let key = (t.clone(), fuel);
                if let Some(d) = self.memo.get(&key) {
                    return Ok(d.clone());
                }
                let fun = self.eval(m, fuel)?;
                let mut out = Distr::bottom();
                for (h, w) in fun.iter() {
                    match h.node() {
                        Node::Lam(body) => {
                            if fuel == 0 {
                                continue;
                            }
                            let next = instantiate(body, n);
                            if next.size() > self.max_term_size {
                                return Err(Error::Resource { cap: "term size", limit: self.max_term_size as usize });
                            }
                            let d = self.eval(&next, fuel - 1)?;
                            out.accumulate_scaled(w, &d);
                        }
                        _ => out.accumulate(Term::app(h.clone(), n.clone()), w.clone()),
                    }
                }
                self.memo.insert(key, out.clone());
                Ok(out)
            }
        }
    }

    pub fn eval_result(&mut self, t: &Term, fuel: u32) -> Result<EvalResult> {
        Ok(EvalResult::new(self.eval(t, fuel)?))
    }
}

pub fn eval_fuel(t: &Term, fuel: u32) -> Result<EvalResult> {
    BigStep::new().eval_result(t, fuel)
}

pub fn eval_mass(t: &Term, fuel: u32) -> Result<Dyadic> {
    Ok(BigStep::new().eval(t, fuel)?.mass())
}

/// Outcome of a bounded search for a derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivability {
    Derivable,
    /// Some weight exceeds what any fuel could ever produce.
    NotDerivable,
    /// Not found within the fuel cap.
    Unknown,
}

/// Is `d` below some big-step approximant of `t`? Searches fuels up to
/// `fuel_cap`. Evaluation is monotone in fuel, so checking the cap suffices.
pub fn check_big_step_derivable(t: &Term, d: &Distr, fuel_cap: u32) -> Result<Derivability> {
    if d.support().any(|h| !matches!(classify(h), Shape::Hnf(_))) || d.mass() > Dyadic::one() {
        return Ok(Derivability::NotDerivable);
    }
    let got = eval_fuel(t, fuel_cap)?;
    if d.leq(&got.distr) {
        return Ok(Derivability::Derivable);
    }
    // the true semantics can only add the missing mass on top of `got`
    let impossible = d.iter().any(|(h, w)| w > &(&got.distr.get(h) + &got.deficit));
    Ok(if impossible { Derivability::NotDerivable } else { Derivability::Unknown })
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
    fn duplicating_a_coin() {
        let t = p("Delta (T (+) F)");
        assert!(eval_fuel(&t, 1).unwrap().distr.is_empty());
        let r = eval_fuel(&t, 2).unwrap();
        assert_eq!(r.distr.get(&p("\\y.T")), d("1/4"));
        assert_eq!(r.distr.get(&p("\\y.F")), d("1/4"));
        assert_eq!(r.distr.get(&p("I")), d("1/2"));
        assert!(r.deficit.is_zero());
    }

    #[test]
    fn omega_never_converges() {
        for f in [0, 1, 5, 20] {
            assert!(eval_fuel(&p("Omega"), f).unwrap().distr.is_empty());
        }
        assert_eq!(eval_fuel(&p("hid"), 1).unwrap().distr, Distr::weighted(p("I"), d("1/2")));
    }

    #[test]
    fn almost_sure_termination_approaches_one() {
        let mm = p("(\\x.y (+) x x) (\\x.y (+) x x)");
        for n in 0..10u32 {
            let want = Dyadic::pow2_inv(n).complement();
            assert_eq!(eval_fuel(&mm, n).unwrap().distr.get(&p("y")), want);
        }
    }

    #[test]
    fn open_terms_evaluate_to_neutral_forms() {
        assert_eq!(eval_mass(&p("x"), 0).unwrap(), Dyadic::one());
        let r = eval_fuel(&p("x (Omega)"), 0).unwrap();
        assert_eq!(r.distr, Distr::point(p("x Omega")));
    }

    #[test]
    fn size_cap_is_reported() {
        // the argument doubles in size every two unfoldings
        let t = p("(\\x a.a (+) x x (a a)) (\\x a.a (+) x x (a a))");
        let err = BigStep::new().with_max_term_size(200).eval(&t, 40).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn derivability_verdicts() {
        let coin = p("Delta (T (+) F)");
        let half_i = Distr::weighted(p("I"), d("1/2"));
        assert_eq!(check_big_step_derivable(&coin, &half_i, 4).unwrap(), Derivability::Derivable);
        let quarter_i = Distr::weighted(p("I"), d("1/4"));
        assert_eq!(check_big_step_derivable(&p("Omega"), &quarter_i, 8).unwrap(), Derivability::Unknown);
        let x = Distr::point(p("x"));
        assert_eq!(check_big_step_derivable(&p("x"), &x, 0).unwrap(), Derivability::Derivable);
        assert_eq!(check_big_step_derivable(&p("y"), &x, 3).unwrap(), Derivability::NotDerivable);
    }
}
