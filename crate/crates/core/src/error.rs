//! Error type shared by every module of the crate.
//!
//! Variants are deliberately coarse-grained: each one corresponds to a
//! distinct failure mode a caller may want to branch on (and, in the CLI,
//! to a distinct process exit code). Diagnostic context — offending values,
//! bracket endpoints — travels inside the variant so error messages can be
//! produced without re-deriving anything.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A function argument was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration (file or struct) failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Conditioning on small-cell association is undefined because the
    /// association probability is zero.
    #[error("small-cell association probability is 0; the conditional expectation is undefined")]
    DegenerateConditioning,

    /// The saturating-integral approximation was requested outside its
    /// validity region.
    #[error(
        "approximate bound requires alpha*d0*sqrt(lambda*pi) >= 4, got {value}; \
         use the exact bound instead"
    )]
    ApproximationDomain {
        /// The offending value of α·d0·√(λπ).
        value: f64,
    },

    /// The planner's target rate exceeds the bound at the top of the
    /// search bracket.
    #[error(
        "target {target_nats} nats is unreachable within the bracket: \
         bound at lambda = {lambda_hi} is only {bound_at_hi} nats"
    )]
    UnreachableTarget {
        /// Requested rate floor, nats per channel use.
        target_nats: f64,
        /// Upper edge of the density bracket, SC/m².
        lambda_hi: f64,
        /// Bound evaluated at `lambda_hi`, nats per channel use.
        bound_at_hi: f64,
    },

    /// The pre-scan found a density pair where the bound decreases, so
    /// bisection would be unsound on this bracket.
    #[error(
        "bound is not nondecreasing on the bracket: bound({lambda_a}) = {bound_a} \
         but bound({lambda_b}) = {bound_b}; subdivide the bracket"
    )]
    NonMonotoneRegime {
        /// Lower density of the first decreasing pair, SC/m².
        lambda_a: f64,
        /// Bound at `lambda_a`, nats.
        bound_a: f64,
        /// Upper density of the first decreasing pair, SC/m².
        lambda_b: f64,
        /// Bound at `lambda_b`, nats.
        bound_b: f64,
    },

    /// The requested operation is meaningless for the given policy.
    #[error("invalid policy for this operation: {0}")]
    InvalidPolicy(String),

    /// The two sampling modes produced statistically incompatible estimates,
    /// which indicates an implementation bug rather than bad input.
    #[error(
        "sampling modes disagree: means {mean_inverse_cdf} vs {mean_finite_ppp} nats \
         differ by more than 3 combined standard errors ({combined_stderr})"
    )]
    SamplingInconsistency {
        /// Mean from the inverse-CDF sampler, nats.
        mean_inverse_cdf: f64,
        /// Mean from the finite-window point-process sampler, nats.
        mean_finite_ppp: f64,
        /// √(stderr₁² + stderr₂²), nats.
        combined_stderr: f64,
    },
}

impl Error {
    /// Stable machine-readable tag for this error kind (used by the CLI's
    /// JSON error objects and exit-code mapping).
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Config(_) => "config",
            Error::DegenerateConditioning => "degenerate-conditioning",
            Error::ApproximationDomain { .. } => "approximation-domain",
            Error::UnreachableTarget { .. } => "unreachable-target",
            Error::NonMonotoneRegime { .. } => "non-monotone-regime",
            Error::InvalidPolicy(_) => "invalid-policy",
            Error::SamplingInconsistency { .. } => "sampling-inconsistency",
        }
    }
}
