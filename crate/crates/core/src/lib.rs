//! Kneser hypergraphs `KG^r_{n,k}`, their random subhypergraphs
//! `KG^r_{n,k}(p)`, and exact independence numbers at desk scale.
//!
//! The closed-form quantities are generic over the exact integer type
//! ([`ExactInt`]) and the real type ([`Real`]); the aliases below fix the
//! defaults used throughout the rest of the crate.

pub mod binomial_sampler;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod extremal;
pub mod model;
pub mod params;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod subset;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Edge, SampledHypergraph, SamplerKind};
pub use params::{CriticalProbability, DerivedQuantities, EmcBranch, EmcValue, Params};
pub use scalar::{ExactInt, Real};
pub use subset::{Family, KSubset};

/// Exact count type.
pub type Count = num_bigint::BigUint;

/// Real type for probabilities and logarithms.
pub type Prob = f64;

/// Quantities with the default scalars.
pub type Quantities = DerivedQuantities<Count, Prob>;
