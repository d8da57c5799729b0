use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("not stratifiable: {0}")]
    NotStratifiable(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("vectors are linearly dependent: {0}")]
    LinearlyDependent(String),
    #[error("frames span different subspaces")]
    DifferentSubspaces,
    #[error("probe degree must be at least 2, got {0}")]
    ProbeDegree(usize),
    #[error("map is not a conformal submersion")]
    NotConformal,
    #[error("no isometry: symplectic spectra are not proportional")]
    NoIsometry,
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error at {at}: {msg}")]
    Parse { at: String, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
