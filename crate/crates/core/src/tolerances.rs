//! Numerical tolerances used across the crate.
//!
//! Each constant is used in exactly the checks its name suggests; tests import
//! them instead of repeating literals.

/// Pauli coefficients with modulus below this are dropped.
pub const PAULI_PRUNE: f64 = 1e-14;

/// Fermion-term coefficients with modulus below this are dropped after normal ordering.
pub const FERMION_PRUNE: f64 = 1e-14;

/// Largest allowed entry of `M - M^dagger` for a matrix flagged Hermitian.
pub const HERMITIAN: f64 = 1e-12;

/// Symmetry checks on one- and two-body integral input.
pub const INTEGRAL_SYMMETRY: f64 = 1e-10;

/// Two ground-state energies closer than this are reported as degenerate.
pub const GROUND_DEGENERACY: f64 = 1e-10;

/// Slack allowed when checking `||op|| <= subnorm` and `||H_rescaled|| <= 1`.
pub const NORM_SLACK: f64 = 1e-9;

/// Filter polynomials whose sup-norm exceeds `1 + eps + this` fail certification.
pub const FILTER_SUP_SLACK: f64 = 1e-9;

/// Number of Chebyshev-spaced points in the certification grid.
pub const CERT_GRID_POINTS: usize = 10_000;

/// Above this degree the grid cannot resolve the polynomial; the rigorous
/// coefficient-tail bound is used alone.
pub const CERT_GRID_MAX_DEGREE: usize = 3_000;

/// Hard cap on erf-polynomial degree.
pub const MAX_POLY_DEGREE: usize = 100_000;

/// Degree up to which the combined Chebyshev coefficients of an indicator
/// filter are materialised (the transform is quadratic in the degree).
pub const COMBINED_COEFF_MAX_DEGREE: usize = 4_096;

/// Default qubit cap for dense realisations.
pub const DEFAULT_QUBIT_CAP: usize = 14;
