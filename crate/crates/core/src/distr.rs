//! Finitely supported subprobability distributions over terms.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::syntax::Term;

/// A finite map from terms (up to α) to positive dyadic weights.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Distr {
    weights: BTreeMap<Term, Dyadic>,
}

impl Distr {
    /// The empty distribution ⊥.
    pub fn bottom() -> Self {
        Distr::default()
    }

    pub fn point(t: Term) -> Self {
        Distr::weighted(t, Dyadic::one())
    }

    pub fn weighted(t: Term, w: Dyadic) -> Self {
        let mut d = Distr::bottom();
        d.accumulate(t, w);
        d
    }

    /// Builds a distribution from weighted terms, merging repeated keys.
    pub fn from_pairs<I: IntoIterator<Item = (Term, Dyadic)>>(pairs: I) -> Result<Self> {
        let mut d = Distr::bottom();
        for (t, w) in pairs {
            d.accumulate(t, w);
        }
        if d.mass() > Dyadic::one() {
            return Err(Error::MassOverflow);
        }
        Ok(d)
    }

    /// Adds `w` to the weight of `t` without checking the total mass.
    pub fn accumulate(&mut self, t: Term, w: Dyadic) {
        if w.is_zero() {
            return;
        }
        match self.weights.get_mut(&t) {
            Some(v) => *v = &*v + &w,
            None => {
                self.weights.insert(t, w);
            }
        }
    }

    /// Adds `q · d` into `self` without checking the total mass.
    pub fn accumulate_scaled(&mut self, q: &Dyadic, d: &Distr) {
        for (t, w) in &d.weights {
            self.accumulate(t.clone(), q * w);
        }
    }

    pub fn scale(&self, q: &Dyadic) -> Distr {
        if q.is_zero() {
            return Distr::bottom();
        }
        Distr { weights: self.weights.iter().map(|(t, w)| (t.clone(), q * w)).collect() }
    }

    /// Pointwise sum; rejects results of mass above 1.
    pub fn add(&self, other: &Distr) -> Result<Distr> {
        if &self.mass() + &other.mass() > Dyadic::one() {
            return Err(Error::MassOverflow);
        }
        let mut out = self.clone();
        for (t, w) in &other.weights {
            out.accumulate(t.clone(), w.clone());
        }
        Ok(out)
    }

    pub fn mass(&self) -> Dyadic {
        self.weights.values().sum()
    }

    /// Pointwise order: every weight of `self` is at most the matching weight of `other`.
    pub fn leq(&self, other: &Distr) -> bool {
        self.weights.iter().all(|(t, w)| match other.weights.get(t) {
            Some(v) => w <= v,
            None => false,
        })
    }

    /// Maps every key `H` to `λx.H`.
    pub fn abstract_lam(&self) -> Distr {
        Distr { weights: self.weights.iter().map(|(t, w)| (Term::lam(t.clone()), w.clone())).collect() }
    }

    /// Mass of the keys satisfying `pred`.
    pub fn restrict(&self, pred: impl Fn(&Term) -> bool) -> Dyadic {
        self.weights.iter().filter(|(t, _)| pred(t)).map(|(_, w)| w).sum()
    }

    pub fn get(&self, t: &Term) -> Dyadic {
        self.weights.get(t).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Dyadic)> {
        self.weights.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.weights.keys()
    }

    /// Entries by decreasing weight, ties broken by printed form.
    pub fn sorted_entries(&self) -> Vec<(String, Term, Dyadic)> {
        let mut v: Vec<_> = self.weights.iter().map(|(t, w)| (t.to_string(), t.clone(), w.clone())).collect();
        v.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// `{"support":[{"term":…,"prob":…}],"mass":…}`
    pub fn to_json(&self) -> Value {
        let support: Vec<Value> =
            self.sorted_entries().into_iter().map(|(s, _, w)| json!({"term": s, "prob": w.to_string()})).collect();
        json!({"support": support, "mass": self.mass().to_string()})
    }
}

impl fmt::Display for Distr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("⊥");
        }
        let parts: Vec<String> = self.sorted_entries().into_iter().map(|(s, _, w)| format!("{w}·{s}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for Distr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn scaling() {
        assert_eq!(Distr::point(p("I")).scale(&d("1/2")), Distr::weighted(p("I"), d("1/2")));
        let tf = Distr::from_pairs([(p("T"), d("1/2")), (p("F"), d("1/2"))]).unwrap();
        assert!(tf.scale(&Dyadic::zero()).is_empty());
        let s = tf.scale(&d("1/4"));
        assert_eq!(s.get(&p("T")), d("1/8"));
        assert_eq!(s.mass(), d("1/4"));
    }

    #[test]
    fn addition_merges_alpha_variants() {
        let a = Distr::weighted(p("\\y.T"), d("1/4"));
        let b = Distr::weighted(p("\\z.F"), d("1/4"));
        assert_eq!(Distr::bottom().add(&a).unwrap(), a);
        assert_eq!(a.add(&b).unwrap().len(), 2);
        let y1 = Distr::weighted(p("y"), d("1/2"));
        let y2 = Distr::weighted(p("y"), d("1/4"));
        assert_eq!(y1.add(&y2).unwrap(), Distr::weighted(p("y"), d("3/4")));
        let twice = Distr::weighted(p("\\u.\\v.u"), d("1/2")).add(&Distr::weighted(p("T"), d("1/2")));
        assert_eq!(twice.unwrap().len(), 1);
    }

    #[test]
    fn overflow_is_rejected() {
        let a = Distr::weighted(p("x"), d("3/4"));
        assert_eq!(a.add(&a), Err(Error::MassOverflow));
    }

    #[test]
    fn order_and_restriction() {
        let i = Distr::weighted(p("I"), d("1/2"));
        let iy = Distr::from_pairs([(p("I"), d("1/2")), (p("y"), d("1/4"))]).unwrap();
        assert!(Distr::bottom().leq(&iy));
        assert!(i.leq(&iy));
        assert!(!i.leq(&Distr::weighted(p("y"), d("1/2"))));
        assert_eq!(iy.restrict(|t| t == &p("I")), d("1/2"));
        assert_eq!(iy.restrict(|_| true), iy.mass());
    }

    #[test]
    fn abstraction_keeps_weights() {
        assert_eq!(Distr::point(Term::bound(0)).abstract_lam(), Distr::point(p("I")));
        assert!(Distr::bottom().abstract_lam().is_empty());
    }

    #[test]
    fn json_shape() {
        let j = Distr::weighted(p("I"), d("3/8")).to_json();
        assert_eq!(j["support"][0]["prob"], "3/8");
        assert_eq!(j["support"][0]["term"], "\\x.x");
        assert_eq!(j["mass"], "3/8");
    }
}
