//! Exact interpreter and equivalence toolkit for the untyped probabilistic
//! λ-calculus with fair binary choice under head reduction.

pub mod bigstep;
pub mod distr;
pub mod dyadic;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod lab;
pub mod props;
pub mod smallstep;
pub mod syntax;
pub mod tree;

pub use distr::Distr;
pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use syntax::{parse, print, Term};
