use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the admissible domain (e.g. Re s <= 0, |zeta| >= 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid parameters caught at construction time.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical procedure failed (singular matrix, branch violation, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Strong passivity violated where the formulation requires it.
    #[error("passivity violation: {0}")]
    Passivity(String),

    /// Mesh topology problem (non-manifold edge, unorientable surface, ...).
    #[error("mesh error: {0}")]
    Mesh(String),

    /// Mesh/config file parse failure.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Run configuration rejected by schema validation.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
