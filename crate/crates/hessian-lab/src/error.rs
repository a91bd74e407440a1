//! Crate-wide error type.
//!
//! `LabError` covers *usage* errors: malformed arguments, dimension
//! mismatches, invalid configuration, and I/O failures. Data-dependent
//! outcomes of a check — pass, fail, or hypothesis refusal — are not errors;
//! they are carried by [`crate::report::CheckOutcome`] so that callers can
//! tell "the question was ill-posed" apart from "the answer is no".

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{op}: dimension mismatch (expected {expected}, got {actual})")]
    Dimension {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{op}: index {index} out of range 0..={max}")]
    IndexRange {
        op: &'static str,
        index: usize,
        max: usize,
    },

    #[error("matrix is not self-adjoint: max |A - A*| entry = {max_asym:.3e}")]
    NotHermitian { max_asym: f64 },

    #[error("metric is not positive definite: Cholesky pivot {pivot} = {value:.3e} <= 0")]
    MetricNotPositive { pivot: usize, value: f64 },

    #[error("non-finite value encountered in {op}")]
    NonFinite { op: &'static str },

    #[error("wedge oracle limited to n <= {max}: got n = {n} ((n!)^2 term blow-up)")]
    WedgeTooBig { n: usize, max: usize },

    #[error("grid too coarse for regularization: h = {h:.3e} > eps/{factor} with eps = {eps:.3e}")]
    EpsGridCoupling { h: f64, eps: f64, factor: f64 },

    #[error("grid: {0}")]
    Grid(String),

    #[error("mask radius {r} too close to the chart boundary {limit}")]
    RadiusOutsideChart { r: f64, limit: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("field file: {0}")]
    FieldFormat(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
