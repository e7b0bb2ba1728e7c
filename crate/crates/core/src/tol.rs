//! One positivity/identity tolerance knob for the whole toolkit.
//!
//! All verifications run in double precision at dimensions below ~4000, so a
//! single absolute tolerance, scaled by the max-norm of the operator at
//! hand, keeps every report comparable.

/// Default absolute tolerance on matrix entries and eigenvalues.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default margin tolerance for inequality suites.
pub const SUITE_TOL: f64 = 1e-9;

/// Scale an absolute tolerance by the magnitude of the data it is applied
/// to. `scale` is typically the max-norm of an operator.
pub fn scaled(tol: f64, scale: f64) -> f64 {
    tol * (1.0 + scale)
}
