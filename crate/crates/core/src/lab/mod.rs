//! Equivalence analysis: the labelled Markov chain, bounded
//! (bi)simulation games, applicative comparison and probabilistic
//! assignments.

pub mod appcmp;
pub mod assign;
pub mod game;
pub mod markov;

pub use appcmp::{applicative_compare, sequences, AppReport, AppRow, AppVerdict};
pub use assign::{check, solve, AssignmentProblem, AssignmentSolution, Solve};
pub use game::{refute_bisim, refute_sim, replay, Bounds, DistinguishingTrace, GameConfig, Relation};
pub use markov::{transitions, MarkovState, StateDistr, TransitionLabel};
