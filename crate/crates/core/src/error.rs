use thiserror::Error;

/// Errors raised by the solvers and the inverse pipeline.
///
/// Domain variants carry the name used by the CLI when it reports a failed
/// run (see [`BcError::name`]).
#[derive(Debug, Error)]
pub enum BcError {
    #[error("no decaying solution: {0}")]
    NoDecayingSolution(String),
    #[error("degenerate eta: |eta'(0)| = {0:e}")]
    DegenerateEta(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("characteristic iteration did not converge after {iterations} sweeps (last update {last_update:e})")]
    NonConvergence { iterations: usize, last_update: f64 },
    #[error("no eigenvalues below lambda_max = {lambda_max} (first eigenvalue is above it)")]
    NoEigenvalues { lambda_max: f64 },
    #[error("gauge vanishes at x = {x}")]
    GaugeZero { x: f64 },
    #[error("ill-conditioned coefficient system: {0}")]
    IllConditioned(String),
    #[error("regularized Gram rank {rank} is below half of {n_controls} controls")]
    RankCollapse { rank: usize, n_controls: usize },
    #[error("potential has no positivity certificate")]
    Uncertified,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BcError {
    pub fn name(&self) -> &'static str {
        match self {
            BcError::NoDecayingSolution(_) => "NoDecayingSolution",
            BcError::DegenerateEta(_) => "DegenerateEta",
            BcError::GridMismatch(_) => "GridMismatch",
            BcError::NonConvergence { .. } => "NonConvergence",
            BcError::NoEigenvalues { .. } => "NoEigenvalues",
            BcError::GaugeZero { .. } => "GaugeZero",
            BcError::IllConditioned(_) => "IllConditioned",
            BcError::RankCollapse { .. } => "RankCollapse",
            BcError::Uncertified => "Uncertified",
            BcError::InvalidArgument(_) => "InvalidArgument",
            BcError::Parse(_) => "Parse",
            BcError::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, BcError>;

pub(crate) fn invalid(msg: impl Into<String>) -> BcError {
    BcError::InvalidArgument(msg.into())
}
