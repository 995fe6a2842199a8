use thiserror::Error;

use crate::half_int::HalfInt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin quantum number (2l = {0}); must be non-negative")]
    InvalidSpin(i32),

    #[error("magnetic quantum number m = {m} is not in the multiplet of l = {l}")]
    InvalidMagnetic { l: HalfInt, m: HalfInt },

    #[error("m = {m} lies outside the coupled multiplets of l = {l} with spin 1/2")]
    OutOfMultiplet { l: HalfInt, m: HalfInt },

    #[error("invalid coupled pair (j = {j}, m = {m}) for l = {l}")]
    InvalidCoupledPair { l: HalfInt, j: HalfInt, m: HalfInt },

    #[error("site index {site} out of range for a layout with {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("state has no ancilla slot")]
    MissingAncilla,

    #[error("state already carries an ancilla slot")]
    UnexpectedAncilla,

    #[error("ancilla is not in the equal superposition (|-> + |+>)/sqrt(2): {0}")]
    AncillaNotPrepared(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing coupling value: {0}")]
    MissingLambda(String),

    #[error("least-squares extraction is singular for the supplied lambda grid")]
    SingularFit,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical contract violated: {0}")]
    ContractViolation(String),
}

impl Error {
    /// True for failures of a numerical guarantee rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::ContractViolation(_) | Error::NotHermitian { .. } | Error::SingularFit)
    }
}
