//! Exact permanents of P-liftings of non-negative matrices.
//!
//! The crate computes permanents of base matrices and their block-permutation
//! lifts in exact rational arithmetic, decomposes permanent-products of a lift
//! into products of permanent-products of the base matrix, expands lift
//! permanents symbolically per exponent matrix, and averages lift permanents
//! into degree-M Bethe permanents. Every inequality check is exact.
//!
//! Enable the default `parallel` feature to spread enumerations over a rayon
//! pool; results are identical with and without it.

pub mod bethe;
pub mod caps;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod json;
pub mod lifting;
pub mod matrix;
mod par;
pub mod render;
pub mod symbolic;

pub use caps::Caps;
pub use error::{Error, Result};
pub use lifting::{BlockPermutation, Lift};
pub use matrix::{Matrix, Permutation, Rational};
