use thiserror::Error;

/// Errors raised by matrix construction, the inverse kernels and the block assemblies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GinvError {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(
        "numerically singular matrix (condition estimate {condition:.3e} exceeds {limit:.1e})"
    )]
    Singular { condition: f64, limit: f64 },

    #[error(
        "unit-consistent scaling did not converge after {sweeps} sweeps (residual {residual:.3e})"
    )]
    Scaling { sweeps: usize, residual: f64 },

    #[error("Frobenius decomposition unreliable: {0}")]
    DecompositionUnreliable(String),

    /// A kernel failed while evaluating a named sub-expression of a block formula.
    #[error("{expr}: {source}")]
    SubExpression {
        expr: String,
        #[source]
        source: Box<GinvError>,
    },
}

impl GinvError {
    pub fn input(msg: impl Into<String>) -> Self {
        GinvError::Input(msg.into())
    }

    /// Wraps `self` with the name of the sub-expression being evaluated.
    pub fn within(self, expr: impl Into<String>) -> Self {
        GinvError::SubExpression {
            expr: expr.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping sub-expression wrappers.
    pub fn root(&self) -> &GinvError {
        match self {
            GinvError::SubExpression { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = GinvError> = std::result::Result<T, E>;
