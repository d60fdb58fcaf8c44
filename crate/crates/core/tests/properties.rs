//! Invariants on randomly generated terms. Each case derives its term(s)
//! from a seed so failures shrink to a reproducible seed.

use plam_core::bigstep::BigStep;
use plam_core::gen::{GenConfig, TermGen};
use plam_core::lab::GameConfig;
use plam_core::props::{self, Verdict};
use plam_core::syntax::{abstract_free, classify, instantiate, Shape};
use plam_core::{Error, Term};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn closed(seed: u64) -> Term {
    TermGen::new(seed, GenConfig::closed(12)).term()
}

fn open(seed: u64) -> Term {
    TermGen::new(seed, GenConfig::open(12, &["x", "y"])).term()
}

fn holds(v: Verdict) -> Result<(), TestCaseError> {
    match v {
        Ok(None) => Ok(()),
        Ok(Some(why)) => Err(TestCaseError::fail(why)),
        Err(Error::Resource { .. }) => Err(TestCaseError::reject("resource cap")),
        Err(e) => Err(TestCaseError::fail(e.to_string())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        holds(props::print_parse_round_trip(&closed(seed)))?;
        holds(props::print_parse_round_trip(&open(seed)))?;
    }

    #[test]
    fn more_fuel_never_loses_mass(seed in any::<u64>()) {
        holds(props::fuel_monotone(&closed(seed), 8))?;
    }

    #[test]
    fn steps_are_stochastic(seed in any::<u64>()) {
        holds(props::step_stochastic(&closed(seed)))?;
        holds(props::step_stochastic(&open(seed)))?;
    }

    #[test]
    fn head_and_spine_agree(seed in any::<u64>()) {
        holds(props::strategies_agree(&closed(seed), 8))?;
    }

    #[test]
    fn big_step_and_reduction_dominate_each_other(seed in any::<u64>()) {
        holds(props::sandwich(&closed(seed), 8, 24))?;
    }

    #[test]
    fn evaluation_respects_term_structure(seed in any::<u64>()) {
        holds(props::eval_identities(&closed(seed), 8))?;
        holds(props::eval_identities(&open(seed), 8))?;
    }

    #[test]
    fn game_certificates_replay(seed in any::<u64>()) {
        let (a, b) = (closed(seed), closed(seed.wrapping_add(1)));
        let cfg = GameConfig::default();
        holds(props::game_certificates_replay(&a, &b, &cfg))?;
        holds(props::below_is_not_refuted(&a, &b, 8, &cfg))?;
    }

    #[test]
    fn tree_equality_descends(seed in any::<u64>()) {
        holds(props::tree_levels_monotone(&closed(seed), &closed(seed ^ 0x9e37), 3, 6))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn redexes_cost_one_step(seed in any::<u64>()) {
        let body = abstract_free(&TermGen::new(seed, GenConfig::open(10, &["x"])).term(), "x");
        holds(props::redex_unfolding(&body, &closed(seed.wrapping_mul(31)), 8))?;
    }

    #[test]
    fn spine_steps_rejoin_head_reduction(seed in any::<u64>()) {
        holds(props::spine_rejoins_head(&closed(seed), 8))?;
    }

    #[test]
    fn abstraction_inverts_instantiation(seed in any::<u64>()) {
        let t = open(seed);
        prop_assert_eq!(instantiate(&abstract_free(&t, "x"), &Term::free("x")), t);
    }

    #[test]
    fn redex_decomposition_reassembles(seed in any::<u64>()) {
        let t = open(seed);
        match classify(&t) {
            Shape::Hnf(h) => prop_assert_eq!(h.to_term(), t),
            Shape::Redex(ctx, r) => prop_assert_eq!(ctx.plug(r.to_term()), t),
        }
    }

    #[test]
    fn distribution_order_is_a_partial_order(seed in any::<u64>()) {
        let mut ev = BigStep::new();
        let t = closed(seed);
        let ds: Vec<_> = (0..4).map(|f| ev.eval(&t, f).unwrap()).collect();
        for a in &ds {
            prop_assert!(a.leq(a));
            for b in &ds {
                if a.leq(b) && b.leq(a) {
                    prop_assert_eq!(a, b);
                }
                for c in &ds {
                    if a.leq(b) && b.leq(c) {
                        prop_assert!(a.leq(c));
                    }
                }
            }
        }
    }
}

// A term whose 17-step prefix needs fuel 9: witnesses come from past the window.
#[test]
fn sandwich_looks_past_the_fuel_window() {
    assert_eq!(props::sandwich(&closed(11370224550969451013), 8, 24).unwrap(), None);
}
