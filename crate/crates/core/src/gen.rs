//! Seeded random term generation for corpora and property checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{constant, Term};

/// Shape parameters for generated terms.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Upper bound on the node count of every generated term.
    pub max_size: u32,
    /// Free names that may occur; empty for closed terms.
    pub free_names: Vec<String>,
    /// Whether built-in constants (I, T, F, Δ, Ω) may appear as leaves.
    pub constants: bool,
}

impl GenConfig {
    pub fn closed(max_size: u32) -> GenConfig {
        GenConfig { max_size, free_names: Vec::new(), constants: true }
    }

    pub fn open(max_size: u32, names: &[&str]) -> GenConfig {
        GenConfig { max_size, free_names: names.iter().map(|s| s.to_string()).collect(), constants: true }
    }
}

const CONSTANTS: [&str; 5] = ["I", "T", "F", "Delta", "Omega"];

pub struct TermGen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    consts: Vec<Term>,
}

impl TermGen {
    pub fn new(seed: u64, cfg: GenConfig) -> TermGen {
        let consts = CONSTANTS.iter().filter_map(|c| constant(c)).collect();
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed), cfg, consts }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A fresh random term of size at most `max_size`.
    pub fn term(&mut self) -> Term {
        let budget = self.rng.gen_range(2..=self.cfg.max_size.max(2));
        self.gen(budget, 0)
    }

    // smallest budget that can produce a term at this depth
    fn min_size(&self, depth: u32) -> u32 {
        if depth > 0 || !self.cfg.free_names.is_empty() {
            1
        } else {
            2
        }
    }

    fn gen(&mut self, budget: u32, depth: u32) -> Term {
        let can_var = depth > 0 || !self.cfg.free_names.is_empty();
        let leaf_min = self.min_size(depth);
        let mut kinds: Vec<(u8, u32)> = Vec::new();
        if can_var {
            kinds.push((0, 3));
        }
        if budget >= 2 {
            kinds.push((1, 3));
        }
        if budget > 2 * leaf_min {
            kinds.push((2, 6));
            kinds.push((3, 2));
        }
        if self.cfg.constants && self.consts.iter().any(|c| c.size() <= budget) {
            kinds.push((4, 2));
        }
        let kind = kinds.choose_weighted(&mut self.rng, |k| k.1).map(|k| k.0).unwrap_or(1);
        match kind {
            0 => {
                let nfree = self.cfg.free_names.len() as u32;
                let pick = self.rng.gen_range(0..depth + nfree);
                if pick < depth {
                    Term::bound(pick)
                } else {
                    Term::free(&self.cfg.free_names[(pick - depth) as usize])
                }
            }
            1 => Term::lam(self.gen(budget - 1, depth + 1)),
            2 | 3 => {
                let rest = budget - 1;
                let left = self.rng.gen_range(leaf_min..=rest - leaf_min);
                let l = self.gen(left, depth);
                let r = self.gen(rest - l.size(), depth);
                if kind == 2 {
                    Term::app(l, r)
                } else {
                    Term::choice(l, r)
                }
            }
            _ => {
                let fitting: Vec<Term> = self.consts.iter().filter(|c| c.size() <= budget).cloned().collect();
                fitting.choose(&mut self.rng).cloned().expect("checked non-empty")
            }
        }
    }
}

/// `count` terms from the generator seeded with `seed`.
pub fn corpus(seed: u64, count: usize, cfg: GenConfig) -> Vec<Term> {
    let mut g = TermGen::new(seed, cfg);
    (0..count).map(|_| g.term()).collect()
}
