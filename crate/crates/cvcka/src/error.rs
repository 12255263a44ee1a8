use thiserror::Error;

/// Errors surfaced by the covariance-matrix engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not a valid covariance matrix: {0}")]
    InvalidMatrix(String),

    #[error("non-physical state: symplectic eigenvalue {nu_min} below 1 (tolerance {tol})")]
    NonPhysical { nu_min: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("numerical rank failure: {0}")]
    NumericalRank(String),

    #[error("channel parameter estimation impossible: {0}")]
    EstimationImpossible(String),

    #[error("parameter estimation failed: {0}")]
    EstimationFailure(String),

    #[error("bisection failed for t={t}: {msg} (rate({lo})={r_lo}, rate({hi})={r_hi})")]
    Bisection {
        t: f64,
        lo: f64,
        hi: f64,
        r_lo: f64,
        r_hi: f64,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
