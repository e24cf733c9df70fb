//! Shared error type for the crate.

/// Errors reported by the library.
///
/// The split mirrors how callers should react: `InvalidInput` /
/// `InvalidParameter` indicate a caller mistake (bad data or bad scalar
/// arguments), `Capacity` a piecewise-polynomial degree overflow,
/// `SpaceMismatch` a sequence/function image-space confusion, and
/// `GridExhausted` a genuine numerical failure of the discrepancy search.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed data: non-finite entries, unsorted breakpoints, bad files.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scalar argument outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A polynomial degree exceeded the configured maximum.
    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    Capacity { degree: usize, max: usize },

    /// An image-space vector of the wrong kind was supplied.
    #[error("image-space mismatch: expected a {expected} vector, found a {found} vector")]
    SpaceMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// A verification depth that cannot contain the identity block.
    #[error("verification depth {depth} must exceed the candidate size n = {n}")]
    InvalidDepth { depth: usize, n: usize },

    /// An operation whose result is undefined for the given input.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The discrepancy search walked the whole grid without success.
    #[error("regularization grid exhausted: best residual {best_residual:.6e} exceeds the bound {bound:.6e}")]
    GridExhausted { best_residual: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
