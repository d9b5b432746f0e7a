//! Pseudorandom generators for polytopes and deterministic approximate
//! counting of regular {0,1} integer programs.
//!
//! - [`polytope`]: the `K(W, θ)` data model, membership and regularity.
//! - [`kwise`]: exact d-wise independent hash families and sign generators.
//! - [`blockprg`]: the hash-partitioned block generator over `{±1}ⁿ`.
//! - [`rotate`]: Walsh–Hadamard rotations and the Gaussian / spherical generators.
//! - [`counting`]: set-cover and contingency-table compilation and counting.
//! - [`oracle`]: exact and Monte Carlo ground-truth probabilities.
//! - [`experiments`]: empirical checks of invariance, anti-concentration and
//!   noise sensitivity.
//! - [`cli`]: the `polyprg` command-line front end.

pub mod blockprg;
pub mod cli;
pub mod counting;
pub mod error;
pub mod experiments;
pub mod gf2;
pub mod kwise;
pub mod oracle;
pub mod polytope;
pub mod rotate;

pub use error::{Error, Result};
pub use polytope::{normalize, CubeEvaluator, PolytopeSpec, RegularityReport};
