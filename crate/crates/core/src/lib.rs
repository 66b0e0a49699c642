//! Exact counts and heuristic predictions for integers of the form `a² + p²`
//! with `p` prime.
//!
//! - [`arith`]: prime tables, primality, per-segment ω* and 𝒩-membership.
//! - [`reps`]: primitive representations, composition, r₀*, r₁, r₁*.
//! - [`sieve`]: the segmented pair sieve producing a [`TallyReport`].
//! - [`checkpoint`]: resumable runs backed by one JSON file per segment.
//! - [`stats`]: N_r(x), π_𝒩(x; k) and comparisons with the asymptotics.
//! - [`heuristics`]: δ, τ, κ, c_κ, f_R, ψ_r, ψ*, predictions, crossover scan.
//! - [`lemmas`]: the congruence data (Δ, ξ, F, ℓ, ν) with brute-force checks.

pub mod arith;
pub mod checkpoint;
pub mod csv;
mod error;
pub mod heuristics;
pub mod lemmas;
pub mod reps;
pub mod sieve;
pub mod stats;

pub use error::{Error, Result};
pub use sieve::{pair_sieve, SegmentTally, TallyReport};
