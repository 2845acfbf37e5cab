use thiserror::Error;

use crate::complementarity::Counterexample;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),
    #[error("not a density matrix: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),
    #[error("channel `{0}` is not a measurement channel")]
    NotMeasurementChannel(String),
    #[error("inequality violated: {0}")]
    Counterexample(Box<Counterexample>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
