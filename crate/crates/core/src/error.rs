use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("reconstructed matrix is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("state is not of X form (off-X entry magnitude {magnitude:e})")]
    NotXState { magnitude: f64 },
    #[error("measurement outcome has vanishing probability")]
    DegenerateOutcome,
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("parameters do not describe a physical state: {0}")]
    NotPhysical(String),
    #[error("degenerate ellipsoid (a_z = {a_z:e})")]
    DegenerateEllipsoid { a_z: f64 },
    #[error("derivative is singular at z = {z} (r = {r})")]
    Singularity { z: f64, r: f64 },
    #[error("root bracket failure: {0}")]
    BracketFailure(String),
    #[error("channel is not completely positive")]
    NotCp,
    #[error("channel is not entanglement breaking")]
    NotEb,
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("invalid variance matrix (min eigenvalue {min_eigenvalue:e})")]
    InvalidVariance { min_eigenvalue: f64 },
    #[error("truncation overflow: tail mass {tail:e} exceeds tolerance at n_cut {n_cut}")]
    TruncationOverflow { tail: f64, n_cut: usize },
    #[error("state is not entangled at zero noise")]
    NoEntanglementAtZeroNoise,
    #[error("non-monotone bracket: {0}")]
    NonMonotoneBracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::NonHermitian { .. } => "non_hermitian",
            Self::NonFinite => "non_finite",
            Self::DimensionMismatch(_) => "dimension_mismatch",
            Self::Domain(_) => "domain",
            Self::InvalidState(_) => "invalid_state",
            Self::NotPositive { .. } => "not_positive",
            Self::NotXState { .. } => "not_x_state",
            Self::DegenerateOutcome => "degenerate_outcome",
            Self::SingularInput(_) => "singular_input",
            Self::NotPhysical(_) => "not_physical",
            Self::DegenerateEllipsoid { .. } => "degenerate_ellipsoid",
            Self::Singularity { .. } => "singularity",
            Self::BracketFailure(_) => "bracket_failure",
            Self::NotCp => "not_cp",
            Self::NotEb => "not_eb",
            Self::NoSolution(_) => "no_solution",
            Self::InvalidVariance { .. } => "invalid_variance",
            Self::TruncationOverflow { .. } => "truncation_overflow",
            Self::NoEntanglementAtZeroNoise => "no_entanglement_at_zero_noise",
            Self::NonMonotoneBracket(_) => "non_monotone_bracket",
        }
    }
}
