// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has zero dimension")]
    Empty,

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |M - M^dag| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("eigenvalue {value:e} is below the clipping floor -{floor:e}")]
    NegativeEigenvalue { value: f64, floor: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("channel is not trace preserving (defect {defect:e} > {tolerance:e})")]
    InvalidChannel { defect: f64, tolerance: f64 },

    #[error("eigensolver failed to converge (dim {dim}, Frobenius norm {norm:e})")]
    Convergence { dim: usize, norm: f64 },

    #[error("numerical underflow: {0}")]
    Underflow(String),

    #[error("integration failed at step {step} (t = {time}): {reason}")]
    Integration {
        step: usize,
        time: f64,
        reason: String,
    },

    #[error("truncation leakage: population {population:e} above level {level} exceeds {limit:e}")]
    Leakage {
        population: f64,
        level: usize,
        limit: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            found,
        }
    }
}
