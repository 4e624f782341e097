//! Permutons, pattern sampling and sampling-entropy sequences.
//!
//! Entropies are in nats throughout.

pub mod combinatorics;
pub mod decay;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod exact;
pub mod gamma;
pub mod io;
pub mod models;
pub mod perm;
pub mod rng;
pub mod tree;

pub use distribution::{mixture_entropy_bounds, quasi_monotonicity_gap, shannon_entropy, PatternDistribution};
pub use error::{Error, Result};
pub use models::PermutonModel;
pub use perm::Permutation;
pub use rng::StreamRng;
