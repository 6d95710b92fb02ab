//! Solvers for Subset Sum variants built on truncated power series over
//! prime fields.
//!
//! * [`ssum_hamming`]: exact solution count and the hamming weights of all
//!   solutions of an instance with few solutions.
//! * [`solution_enum`]: all solutions through coefficient evaluation and sparse
//!   multilinear interpolation.
//! * [`simulsum`]: simultaneous subset sum via multivariate log/exp.
//! * [`subset_product`]: subset product by factoring into a simultaneous
//!   instance, plus a low-space deterministic decider.
//! * [`reductions`]: instance transformers between the variants.
//! * [`oracles`]: brute force and dynamic programming ground truth.

pub mod error;
pub mod generators;
pub mod modmath;
pub mod oracles;
pub mod reductions;
pub mod series;
pub mod simulsum;
pub mod solution_enum;
pub mod ssum_hamming;
pub mod subset_product;

pub use error::{Error, Result};
pub use modmath::{ModPoly, PrimeField};
pub use ssum_hamming::{SsumInstance, WeightProfile};
pub use solution_enum::{SolutionSet, SparseMultilinear};
pub use simulsum::{MultiPoly, SimulInstance};
pub use subset_product::{ProductInstance, PseudoPrimeFactorization};
pub use reductions::{IsolationBatch, UbssumInstance};
