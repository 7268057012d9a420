//! Error type shared by all modules.

/// Errors produced by mesh generation, assembly and the linear solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    /// The two meshes disagree about the interface geometry.
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    /// Cholesky hit a non-positive pivot; `index` is the offending
    /// unknown in the original (unpermuted) numbering.
    #[error("matrix not positive definite (pivot at index {index})")]
    NotPositiveDefinite { index: usize },

    /// Broken internal invariant, e.g. a trace evaluation outside the
    /// owning facet of a mortar segment.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Pipeline stage the error belongs to, used by CLI diagnostics.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "config",
            Error::InvalidMesh(_) => "mesh",
            Error::GeometryMismatch(_) => "interface",
            Error::NotPositiveDefinite { .. } => "solve",
            Error::Internal(_) => "internal",
        }
    }
}
