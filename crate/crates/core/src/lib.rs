//! Splitting finite-dimensional representations of commutative semigroups
//! into a reversible part and an almost weakly stable part.
//!
//! The main entry points are [`split::decompose_spectral`],
//! [`split::decompose_idempotent`] and [`split::decompose_by_gram`], which all
//! return a [`JdLGSplit`]. [`battery`] checks the equivalent characterizations
//! of almost weak stability for a single vector, [`unitary`] decomposes the
//! reversible part into irreducible unitary pieces and [`klawe`] tabulates the
//! counterexample on the affine `ax + b` semigroup.

pub mod battery;
pub mod catalog;
pub mod closure;
pub mod error;
pub mod folner;
pub mod klawe;
pub mod linalg;
pub mod representation;
pub mod semigroup;
pub mod split;
pub mod tolerances;
pub mod unitary;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, C64};
pub use representation::MatrixRepresentation;
pub use split::{JdLGSplit, Method};
pub use tolerances::Tolerances;
