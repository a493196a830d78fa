//! Error type shared by every module of the crate.

use std::fmt;

/// Failure modes of plant validation, the numerical kernels, the solver, and
/// gain recovery. Payloads are reported in `f64` regardless of the working
/// scalar type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The state and input weighting rows are coupled: CᵀD has an entry of
    /// magnitude `max_abs`, but the cost must not mix state and input terms.
    CrossWeighting { max_abs: f64 },
    /// DᵀD is not positive definite, so the input weighting does not
    /// penalize every control direction.
    SingularControlWeight { min_eig: f64 },
    /// Matrix shapes are mutually inconsistent.
    DimensionMismatch { context: String },
    /// Enumerating every perturbation sign pattern would produce more than
    /// `cap` vertices (2^`entries` needed).
    TooManyVertices { entries: usize, cap: usize },
    /// A matrix handed to the positive-semidefinite projection deviates from
    /// symmetry by more than the admissible round-off band.
    AsymmetricInput { asymmetry: f64 },
    /// The penalty parameter must be strictly positive.
    NonPositiveSigma { sigma: f64 },
    /// A closed-loop matrix has an eigenvalue with real part `max_real_eig`
    /// that is not strictly negative, so no Gramian exists.
    NotHurwitz { max_real_eig: f64 },
    /// The vectorized Lyapunov system could not be solved to the required
    /// residual accuracy.
    SingularSystem { residual: f64 },
    /// A non-finite value appeared inside an iterative kernel.
    NumericalBreakdown { context: String },
    /// The leading block of the certificate is numerically singular, so no
    /// gain can be recovered from it.
    SingularW1 { min_eig: f64 },
    /// The certificate violates the decentralized zero pattern: selector
    /// pair `pair` sees residual `residual` above the tolerance `tol`.
    SparsityViolated { pair: usize, residual: f64, tol: f64 },
    /// A configuration value is outside its admissible range.
    InvalidConfig { context: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CrossWeighting { max_abs } => write!(
                f,
                "cross weighting: CᵀD must vanish but has an entry of magnitude {max_abs:.3e}"
            ),
            Error::SingularControlWeight { min_eig } => write!(
                f,
                "control weight DᵀD is not positive definite (min eigenvalue {min_eig:.3e})"
            ),
            Error::DimensionMismatch { context } => write!(f, "dimension mismatch: {context}"),
            Error::TooManyVertices { entries, cap } => write!(
                f,
                "2^{entries} perturbation vertices exceed the configured cap of {cap}"
            ),
            Error::AsymmetricInput { asymmetry } => write!(
                f,
                "matrix is not symmetric (relative asymmetry {asymmetry:.3e})"
            ),
            Error::NonPositiveSigma { sigma } => {
                write!(f, "penalty parameter must be positive, got {sigma:.3e}")
            }
            Error::NotHurwitz { max_real_eig } => write!(
                f,
                "matrix is not Hurwitz (max eigenvalue real part {max_real_eig:.3e})"
            ),
            Error::SingularSystem { residual } => write!(
                f,
                "Lyapunov system is numerically singular (residual {residual:.3e})"
            ),
            Error::NumericalBreakdown { context } => {
                write!(f, "numerical breakdown: {context}")
            }
            Error::SingularW1 { min_eig } => write!(
                f,
                "leading certificate block is numerically singular (min eigenvalue {min_eig:.3e})"
            ),
            Error::SparsityViolated { pair, residual, tol } => write!(
                f,
                "decentralized zero pattern violated at selector pair {pair}: \
                 residual {residual:.3e} exceeds tolerance {tol:.3e}"
            ),
            Error::InvalidConfig { context } => write!(f, "invalid configuration: {context}"),
        }
    }
}

impl std::error::Error for Error {}
