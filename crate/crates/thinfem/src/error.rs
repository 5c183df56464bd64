use thiserror::Error;

/// Error type shared by every module of the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),

    #[error("torus cell dimension {0} exceeds the tensor-quadrature budget of 4")]
    TorusDimension(usize),

    #[error("non-finite sample in {context} near coordinate {at}")]
    NonFinite { context: &'static str, at: f64 },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "conjugate gradients stopped after {max_iter} iterations with relative residual \
         {residual:.3e} (tolerance {tol:.3e})"
    )]
    NoConvergence {
        max_iter: usize,
        residual: f64,
        tol: f64,
    },

    #[error("slice at y = {y} leaves the domain for x in [{x_min}, {x_max}]")]
    SliceOutsideDomain { y: f64, x_min: f64, x_max: f64 },

    #[error("non-positive coefficient {value:.6e} sampled at x = {x}")]
    NonPositiveCoefficient { x: f64, value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
