//! High-order free probability on combinatorial maps.
//!
//! The crate covers trace maps and their non-crossing poset, distributions
//! on maps and their free cumulants, truncated power series for the
//! moment/cumulant relations and transforms, dense tensors with
//! trace-invariant evaluation, and Wigner/Wishart tensor samplers.

pub mod checks;
pub mod distribution;
pub mod ensembles;
pub mod error;
pub mod map;
pub mod perm;
pub mod poset;
pub mod rational;
pub mod series;
pub mod tensor;

pub use distribution::MapDistribution;
pub use error::{Error, Result};
pub use map::{CanonicalCode, CombMap};
pub use perm::Permutation;
pub use rational::Q;
pub use tensor::DenseTensor;
