//! Cyclicity of elliptic-curve reductions in arithmetic progressions.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact_arith`]: big rationals, factorisation, square classes, Kronecker symbols,
//!   polynomials and rational functions over `Q`.
//! * [`multiquadratic`]: multiquadratic fields as spans of square classes, their
//!   intersection with cyclotomic fields and the Galois fibre over `σ_a`.
//! * [`family`]: the two-parameter curve family with level-6 image `B(2) × C_s(3)`,
//!   its division fields and witness certificates.
//! * [`ec_reduction`]: reduction modulo `p`, point counts, group structure and
//!   full torsion tests.
//! * [`harness`]: prime sweeps, cached surveys, and verification reports.
//! * [`gl2`]: subgroups of `GL₂(ℤ/mℤ)`, genus, levels and acyclicity checks.
//! * [`constant`]: the density constant `C_{E,a,n}` by two independent routes.

pub mod constant;
pub mod ec_reduction;
pub mod error;
pub mod exact_arith;
pub mod family;
pub mod gl2;
pub mod harness;
pub mod multiquadratic;

pub use error::{Error, Result};
