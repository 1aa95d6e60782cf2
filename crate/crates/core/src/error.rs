use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph construction failed after {attempts} attempts: {reason}")]
    ConstructionFailure { attempts: usize, reason: String },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate:.6e}, residual {residual:.3e})")]
    ConvergenceFailure {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("resolvent ill-conditioned: spectral gap {gap:.3e} below floor {floor:.3e}")]
    IllConditionedResolvent { gap: f64, floor: f64 },

    #[error("spectral inconsistency: {0}")]
    SpectralInconsistency(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("invalid coset point: {0}")]
    InvalidCosetPoint(String),

    #[error("group action undefined: {0}")]
    ActionUndefined(String),

    #[error("series does not converge, rescale inputs: body norm {norm:.3e}")]
    RescaleRequired { norm: f64 },

    #[error("invalid trace pattern: {0}")]
    InvalidPattern(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
