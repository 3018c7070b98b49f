use thiserror::Error;

/// Errors raised by the library. Every variant is an input or limit problem
/// except `InternalNonzeroResidual` and `EmptyCandidateList`, which would
/// indicate a broken invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("size cap `{cap}` exceeded: requested {requested}, limit {limit} (raise it with --cap-{cap})")]
    SizeCapExceeded {
        cap: &'static str,
        limit: u64,
        requested: u64,
    },

    #[error("matrix must have at least one row")]
    EmptyMatrix,

    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid exponent matrix: {0}")]
    InvalidExponentMatrix(String),

    #[error("permanent-product is trivially zero at row {index}")]
    TriviallyZero { index: usize },

    #[error("block permutation is not reduced; reduce it first")]
    NotReduced,

    #[error("decomposition pass left a nonzero residual")]
    InternalNonzeroResidual,

    #[error("standard mapping produced an empty candidate list")]
    EmptyCandidateList,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_cap(cap: &'static str, requested: u64, limit: u64) -> Result<()> {
    if requested > limit {
        Err(Error::SizeCapExceeded { cap, limit, requested })
    } else {
        Ok(())
    }
}
