//! Error type shared by the whole crate. Numerical payloads are carried as
//! `f64` regardless of the scalar the computation ran in, so the error enum
//! stays object-safe and displayable everywhere.

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("particle number must be at least 1, got {0}")]
    NoParticles(u32),

    #[error("full product space limited to 14 particles (2^N basis states), got N = {0}")]
    FullSpaceTooLarge(u32),

    #[error("operation needs an even particle number, got N = {0}")]
    OddParticleCount(u32),

    #[error("excitation number {m} out of range 0..={n} for N = {n} particles")]
    ExcitationOutOfRange { m: u32, n: u32 },

    #[error("states/operators live on different spin systems ({left} vs {right})")]
    SystemMismatch { left: String, right: String },

    #[error("matrix is not Hermitian (max |A - A†| entry = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state vector is not normalized (|norm - 1| = {deviation:.3e})")]
    NotUnitNorm { deviation: f64 },

    #[error("density matrix trace differs from 1 by {deviation:.3e}")]
    NotUnitTrace { deviation: f64 },

    #[error("density matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("state tagged phase-averaged does not commute with J_z (max |[ρ,J_z]| = {deviation:.3e})")]
    NotPhaseInvariant { deviation: f64 },

    #[error("eigensolver did not converge for a {dim}×{dim} matrix within {max_iterations} iterations")]
    EighNoConvergence { dim: usize, max_iterations: usize },

    #[error("sensitivity formula degenerate: {detail}")]
    DegenerateMoments { detail: String },

    #[error("sensitivity undefined where sin θ cos θ = 0 (θ = {theta:.6e}); no signal slope there")]
    AngleSingularity { theta: f64 },

    #[error(
        "moment set carries nonzero odd correlations (max |odd| = {max_abs:.3e}); \
         the even-symmetry closed form does not apply — use moment_dynamics instead"
    )]
    OddMomentsPresent { max_abs: f64 },

    #[error("squared variance of {what} is negative ({value:.6e}); inconsistent input moments")]
    NegativeSquaredVariance { what: &'static str, value: f64 },

    #[error("{what} must be positive, got {value:.6e}")]
    NonPositiveParameter { what: &'static str, value: f64 },

    #[error("optimal variance evaluated non-positive ({value:.6e}); inconsistent input moments")]
    NonPositiveVariance { value: f64 },

    #[error("bootstrap needs at least {minimum} resamples, got {requested}")]
    TooFewResamples { requested: usize, minimum: usize },

    #[error("bootstrap kept only {kept} of {total} resamples (>50% discarded); input moments too noisy")]
    TooFewValidResamples { kept: usize, total: usize },

    #[error("moments file, line {line}: {message}")]
    MomentsFileLine { line: usize, message: String },

    #[error("moments file: missing required keys: {0}")]
    MomentsFileMissingKeys(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
