//! Exact counting of congruence classes of simplex structures in F_q^d.
//!
//! The crate is organised bottom-up: [`field`] arithmetic, the orthogonal
//! [`group`], the [`fourier`] transform, the combinatorial [`structure`]
//! model with its rewrites, the embedding counts in [`counting`], and the
//! Monte Carlo harness in [`experiments`].

pub mod counting;
pub mod error;
pub mod experiments;
pub mod field;
pub mod fourier;
pub mod group;
pub mod structure;

pub use error::{Error, Result};
