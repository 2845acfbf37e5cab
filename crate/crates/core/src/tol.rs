//! Numerical tolerances shared by every module.

/// Hermiticity check, max-entry norm of M − M†.
pub const TOL_HERM: f64 = 1e-10;
/// Jacobi stopping threshold on the off-diagonal Frobenius norm (relative to ‖M‖ when ‖M‖ > 1).
pub const TOL_EIG: f64 = 1e-12;
/// Eigenvalues in [−TOL_PSD, 0) are treated as zero.
pub const TOL_PSD: f64 = 1e-10;
/// Unit-trace check for density matrices.
pub const TOL_TRACE: f64 = 1e-10;
/// Unit-norm check for pure states.
pub const TOL_NORM: f64 = 1e-10;
/// Kraus completeness Σ K†K = I.
pub const TOL_CPTP: f64 = 1e-9;
/// Negative values of provably nonnegative quantities (D, Q_D, E_R) above this are clamped to 0.
pub const TOL_CLAMP: f64 = 1e-8;
/// An inequality report counts as satisfied when residual ≥ −TOL_RESIDUAL.
pub const TOL_RESIDUAL: f64 = 1e-8;
/// Relative entropy support test: σ eigenvalues below this count as zero...
pub const TOL_SUPPORT_SIGMA: f64 = 1e-12;
/// ...when ρ puts more weight than this on the corresponding eigenvector.
pub const TOL_SUPPORT_RHO: f64 = 1e-10;
