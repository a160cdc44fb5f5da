// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unphysical Stokes vector: length {length} exceeds 1")]
    UnphysicalStokes { length: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid process matrix: {0}")]
    InvalidProcess(String),

    #[error("crystal length must be positive, got {0}")]
    NonPositiveLength(String),

    #[error("crystal length {0} is not an integer; normalize the bench first")]
    NonIntegerLength(String),

    #[error("bench has no optical elements")]
    EmptyBench,

    #[error("Kraus set is not trace preserving (completeness error {error:.3e})")]
    IncompleteKraus { error: f64 },

    #[error("count table has shape {found}, expected {expected}")]
    CountShape { expected: String, found: String },

    #[error("malformed count record: {0}")]
    CountFormat(String),

    #[error("invalid tomography settings: {0}")]
    InvalidSettings(String),
}
