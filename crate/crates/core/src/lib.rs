//! Approximate Nash equilibria for bimatrix games and two-strategy anonymous
//! games.
//!
//! - [`game`]: game representations, mixed profiles and exact regret.
//! - [`pbd`]: exact computations on sums of independent indicators
//!   (Poisson binomial distributions), total variation, power sums and the
//!   binomial-derivative expansion.
//! - [`grid`]: exact integer arithmetic on `j / k²` probability grids.
//! - [`moments`]: the layered dynamic program that realizes prescribed power
//!   sums with per-variable grid values.
//! - [`bimatrix`]: the uniform-pair solver for sparse games and the oblivious
//!   random-multiset sampler.
//! - [`search`]: Moment Search for anonymous games, the single-probability
//!   search and a brute-force grid oracle.
//! - [`cover`]: sparse ε-cover of sums of indicators.
//! - [`hard`]: generators for adversarial lower-bound instances and random games.

pub mod bimatrix;
pub mod cover;
pub mod error;
pub mod game;
pub mod grid;
pub mod hard;
pub mod moments;
pub mod pbd;
pub mod search;

pub use error::{Error, Result};
pub use game::{AnonymousGame, AnonymousProfile, BimatrixGame, MixedPair, RegretMode};
pub use pbd::{CountDistribution, IndicatorCollection, MomentProfile, SignedMeasure};

/// A probability counts as "in the support" iff it exceeds this value.
pub const SUPPORT_TOL: f64 = 1e-12;
