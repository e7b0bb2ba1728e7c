//! Exact-diagonalization machinery for operator inequalities on self-dual
//! cones, and the Griffiths-type correlation bounds they imply.
//!
//! The crate is organized in layers:
//!
//! * [`linalg`] — dense complex matrices tagged with the basis they live in,
//!   Kronecker products, Hermitian eigendecomposition, matrix exponentials.
//! * [`cones`] — coordinate and PSD self-dual cones, with decidable
//!   positivity-preservation tests in the coordinate case and sampled
//!   evidence in the PSD case.
//! * [`doubling`] — left/right multiplication operators on Hilbert–Schmidt
//!   space, the basis map to the tensor-doubled space, and
//!   certificate-carrying reflection-positive operators.
//! * [`models`] — builders for the quantum Ising, quantum rotor,
//!   Bose–Hubbard and Hubbard families at desk scale, including the doubled
//!   constructions each proof route needs.
//! * [`expectations`] — thermal, time-ordered, Duhamel, doubled and
//!   ground-state expectation values from spectral data.
//! * [`verifier`] — executable inequality suites, one per theorem, plus
//!   structural cone suites, monotonicity suites and a counterexample mode.

pub mod cones;
pub mod doubling;
pub mod error;
pub mod expectations;
pub mod linalg;
pub mod models;
pub mod tol;
pub mod verifier;

pub use error::CoreError;
pub use linalg::{BasisTag, Operator, Spectral, C64};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
