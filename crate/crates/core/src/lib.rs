//! Exact arithmetic for digit-permuted Salem functions.
//!
//! A point of `[0, 1]` is carried as an eventually periodic digit string in
//! base `q`. Its value under a probability vector `p = (p_0, ..., p_{q-1})`
//! is the Salem series
//!
//! ```text
//! x = β_{i_1} + Σ_{k≥2} β_{i_k} Π_{r<k} p_{i_r},    β_t = p_0 + ... + p_{t-1}
//! ```
//!
//! and the function studied here sends that point to the value of the same
//! string after every digit has been passed through a permutation `θ`:
//!
//! ```text
//! f(Δ_{i_1 i_2 ...}) = Δ_{θ(i_1) θ(i_2) ...}
//! ```
//!
//! Every quantity that can be computed exactly is computed as a big rational,
//! so identities such as the functional equation `f(x) = β_{θ(i_1)} +
//! p_{θ(i_1)} f(σx)` are checked with zero tolerance.
//!
//! Modules:
//!
//! * [`numerals`]: digit expansions, their grammar, canonical spellings,
//!   values, shifts and cylinders.
//! * [`salem`]: permutations, the evaluated function and its functional
//!   equation.
//! * [`analysis`]: integrals, jumps, collisions, increments, difference
//!   quotients and digit statistics.
//! * [`selfaffine`]: the iterated function system whose attractor is the
//!   graph, plus CSV/SVG export.

pub mod analysis;
mod error;
pub mod numerals;
pub mod rational;
pub mod salem;
pub mod sample;
pub mod selfaffine;

pub use error::{Error, Result};
pub use numerals::{DigitExpansion, Extraction, PartitionParams};
pub use rational::Rational;
pub use salem::{DigitPermutation, SalemSystem};
