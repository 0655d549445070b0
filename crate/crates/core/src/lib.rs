//! Exact computation of the total Milnor-Witt motivic cohomology ring of a
//! hyperplane arrangement complement in affine space.
//!
//! The ring is presented by unit generators `(f)` for `f` in the unit group of
//! the complement, with Milnor-Witt K-theory coefficients, modulo the ideal
//! spanned by the constant-identification, twisted-logarithm, anticommutativity
//! and R-polynomial relations. A normal-form algorithm produces coordinates
//! over a broken-circuit-free basis, and everything is cross-checked against a
//! combinatorial exterior-algebra model over `Z[eta]/2eta` as well as a
//! deletion-restriction rank recursion.
//!
//! All arithmetic is exact: arbitrary-precision rationals or odd prime fields.

pub mod arrangement;
pub mod linalg;
pub mod milnor_witt;
pub mod os_model;
pub mod presentation;
pub mod quadratic_oracle;
pub mod scalar;
pub mod verify;

pub use arrangement::{Arrangement, Circuit, Flat, Hyperplane, Unit};
pub use scalar::{FieldSpec, Scalar, SquareClass};
