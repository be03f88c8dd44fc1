use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },

    #[error("eigendecomposition did not converge: {0}")]
    NoConvergence(String),

    #[error("operator is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("map is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("parameter {name} = {value} outside valid range {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("derivative is not traceless (trace {trace:.3e})")]
    NonTraceless { trace: f64 },

    #[error("vector is not normalized: {0}")]
    NotNormalized(String),

    #[error("alpha = {alpha} outside {allowed}")]
    BadAlpha { alpha: f64, allowed: &'static str },

    #[error("semi-definite program infeasible: {0}")]
    Infeasible(String),

    #[error("solver stopped after {iterations} iterations (relative gap {gap:.3e})")]
    MaxIterations { iterations: usize, gap: f64 },

    #[error("invalid channel descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
