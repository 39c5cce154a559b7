//! Exact-arithmetic models of symmetric-space tangent algebras (Lie triple
//! systems), their curvature tensors, restricted-root data, and the sparse
//! linear systems that constrain connection maps K and Cotton-York maps Phi.
//!
//! All numbers are exact: arbitrary-precision rationals, a single quadratic
//! extension Q(sqrt d) when a model demands one, or GF(p) for large systems
//! with two-prime agreement and optional rational certification.

pub mod cli;
pub mod constraints;
pub mod curvature;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod sparse;
pub mod spaces;
pub mod spin9;
pub mod verify;

pub use error::{Result, SymError};
pub use scalar::{FieldSpec, Rational, Rng, Scalar};

pub fn cli_main() -> i32 {
    cli::run(std::env::args_os())
}
