//! Lattice-theoretic obstructions to smoothing finite group actions on
//! closed 4-manifolds.
//!
//! The pipeline is: build a unimodular [`Lattice`], describe a finite group
//! action by integer [`Isometry`] generators, extract the positive definite
//! invariant subspace and its representation type, evaluate the top
//! Stiefel-Whitney class of the associated bundle, and report a [`Verdict`].

pub mod char_classes;
pub mod examples_search;
pub mod invariant_subspace;
pub mod isometry;
pub mod lattice;
pub mod obstruction;
pub mod linalg;
pub mod scalar;

pub use invariant_subspace::{CyclicMults, EpsMatrix, InvariantSubspace, RepDecomposition};
pub use isometry::{GroupAction, GroupShape, Isometry, IsometryError};
pub use lattice::{Lattice, LatticeError, Summand};
pub use linalg::Matrix;
pub use obstruction::{check, CheckOptions, Conclusion, ManifoldData, Verdict};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Integer matrices: Gram matrices and isometries.
pub type IntMatrix = linalg::Matrix<i64>;
/// Exact rational matrices.
pub type QMatrix = linalg::Matrix<Rational>;
/// Floating point matrices.
pub type RealMatrix = linalg::Matrix<f64>;
