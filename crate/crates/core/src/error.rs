use thiserror::Error;

/// Errors produced by model construction and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model data: dimension mismatches, non-Hermitian input,
    /// states failing the density-matrix tolerances.
    #[error("model error: {0}")]
    Model(String),

    /// A dephasing function vanished where a Hadamard inverse is required.
    #[error("not invertible: |phi_{j}{l}({t})| = {modulus:e} below threshold")]
    NotInvertible { j: usize, l: usize, t: f64, modulus: f64 },

    /// Tuple enumeration would exceed the configured evaluation budget.
    #[error("budget exceeded: {required} tuple evaluations requested, limit is {limit}")]
    Budget { required: usize, limit: usize },

    /// The phase integral does not converge for the requested form factors.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Unsupported form-factor kind or combination for this operation.
    #[error("unsupported form-factor kind: {0}")]
    Kind(String),

    /// Truncated Fock evolution leaked into the top levels.
    #[error("Fock truncation leakage {leak:e} exceeds 1e-10 in mode {mode}")]
    Leakage { mode: usize, leak: f64 },

    /// Input outside the analytically treated cases.
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    /// Quadrature could not reach the requested tolerance.
    #[error("accuracy error: estimated error {achieved:e} exceeds tolerance {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
