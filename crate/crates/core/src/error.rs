use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at {context}")]
    NonFinite { context: String, value: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid moment sequence: {0}")]
    InvalidSequence(String),

    #[error("polynomial of degree {degree} needs moments up to order {degree}, only {available} available")]
    DegreeOverflow { degree: usize, available: usize },

    #[error("need moments up to order {needed}, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("moment sequence is infeasible on {support}: block `{block}` has minimum eigenvalue {min_eigen:e}")]
    Infeasible {
        support: String,
        block: String,
        min_eigen: f64,
    },

    #[error("Hankel block `{block}` is indefinite: pivot {pivot:e} at row {row}")]
    Indefinite {
        block: String,
        row: usize,
        pivot: f64,
    },

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("eigen residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("node {node} lies outside {support} by {distance:e}")]
    NodeOutsideSupport {
        node: f64,
        support: String,
        distance: f64,
    },

    #[error("reconstructed moment of order {order} has relative error {rel_error:e} > {tol:e}")]
    MomentMismatch { order: usize, rel_error: f64, tol: f64 },

    #[error("integrand is not integrable: {0}")]
    NotIntegrable(String),

    #[error("operation requires an atomic measure")]
    NotAtomic,

    #[error("grid points coincide with atoms of the limit: {0:?}")]
    GridHitsAtom(Vec<f64>),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
