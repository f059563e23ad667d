use thiserror::Error;

/// Errors produced by the approximation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the admissible domain of an operation.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Two parameter sets cannot be combined (e.g. non-integer Jacobi offsets).
    #[error("incompatible parameters: {0}")]
    IncompatibleParameters(String),

    /// The operation needs per-index eigenfunctions, but the space is kernel-level only.
    #[error("unsupported operation on {space}: {what}")]
    Unsupported { space: String, what: String },

    /// The kernel or operator would reach past the stored spectrum.
    #[error("insufficient spectrum: requested up to {requested}, available up to {available}")]
    InsufficientSpectrum { requested: f64, available: f64 },

    /// An evaluation point lies outside the admissible set.
    #[error("point outside domain: {0}")]
    Domain(String),

    /// An iterative numerical routine failed.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A dyadic limit did not settle within the allowed number of levels.
    #[error("no convergence within {levels} levels (last difference {last:.3e})")]
    NonConvergence {
        levels: usize,
        last: f64,
        differences: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
