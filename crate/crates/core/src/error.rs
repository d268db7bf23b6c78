use thiserror::Error;

/// Failures raised by the laboratory.
///
/// Numerical diagnostics are carried as `f64` regardless of the scalar type
/// the computation ran in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid group table: {axiom} fails")]
    InvalidGroupTable { axiom: String },

    #[error("malformed structure: {0}")]
    Structure(String),

    #[error("counit is not normalized: ε(1) = {value}")]
    CounitNormalization { value: f64 },

    #[error("Haar state is not unique: invariance system has nullity {nullity} (singular-value gap {gap:e})")]
    NonUniqueHaar { nullity: usize, gap: f64 },

    #[error("functional is not a state: minimal Gram eigenvalue {min_eig:e}, value at unit {unit_value}")]
    NotAState { min_eig: f64, unit_value: f64 },

    #[error("functional is not positive: minimal Gram eigenvalue {min_eig:e}")]
    NonPositive { min_eig: f64 },

    #[error("operator is not a kernel: {reason}")]
    NotAKernel { reason: String },

    #[error("Cesàro averages did not settle within n_max = {n_max}: residual {residual:e}")]
    CesaroNonConvergence { n_max: usize, residual: f64 },

    #[error("functional is not symmetric: ‖φ − φ*‖ = {residual:e}")]
    NotSymmetric { residual: f64 },

    #[error("no convergence certificate with h(1 − e) < {epsilon}: best projection leaves tail {tail:e}")]
    CertificateFailed { epsilon: f64, tail: f64 },

    #[error("Haar state is not tracial (residual {residual:e}); use the corepresentation block model")]
    NonTracialHaar { residual: f64 },

    #[error("Haar state has not been solved for group `{0}`")]
    HaarMissing(String),

    #[error("Haar state is not faithful: minimal Gram eigenvalue {min_eig:e}")]
    NonFaithfulHaar { min_eig: f64 },

    #[error("invalid L^p exponent {0}")]
    InvalidExponent(String),

    #[error("invalid generating functional: {0}")]
    InvalidGenerator(String),

    #[error("time parameter must be positive, got {0}")]
    InvalidTime(f64),

    #[error("functional is not invariant under the scaling group: commutator norm {commutator:e}")]
    NotTauInvariant { commutator: f64 },

    #[error("deformation parameter q = {0} outside (0, 1]")]
    InvalidDeformation(f64),

    #[error("invalid spin {0}: must be a non-negative half-integer")]
    InvalidSpin(f64),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
