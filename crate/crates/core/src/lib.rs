//! Row reordering and variable-height blocking of sparse matrices.
//!
//! Rows are grouped by the similarity of their quotient patterns against a
//! fixed column partition, producing a variable block row (VBR) layout whose
//! stored blocks can be fed to dense tile kernels. The `bounded` merge policy
//! guarantees every block row has density at least `τ/2` relative to its
//! column pattern.

pub mod blocking;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod matrix;
pub mod metrics;
pub mod multiply;

pub use error::{Error, Result};
