use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: {n} qubits exceeds the cap of {cap}")]
    DimensionCap {
        what: &'static str,
        n: usize,
        cap: usize,
    },
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),
    #[error("invalid basis label {label:?}: {reason}")]
    InvalidLabel { label: String, reason: String },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("Hamiltonian terms {a} and {b} do not commute; Trotterization would be required")]
    NonCommutingTerms { a: String, b: String },
    #[error("evolution circuits require gamma = 0 (got {0})")]
    NonZeroGamma(f64),
    #[error("term has no non-identity letters")]
    IdentityTerm,
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("circuit contains a measurement")]
    MeasurementPresent,
    #[error("circuit has no CNOT gates to fold")]
    NothingToFold,
    #[error("invalid scale factor {0}: must be finite and >= 1")]
    InvalidScale(f64),
    #[error("circuit needs {needed} qubits but topology {topology} has {available}")]
    InsufficientQubits {
        topology: String,
        needed: usize,
        available: usize,
    },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("observable is not diagonal in the measured basis: {0}")]
    NotDiagonal(String),
    #[error("extrapolation needs {needed} points with distinct scale factors, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("readout mitigation did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("nothing to write: result table is empty")]
    EmptyTable,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (configs, labels, files that do
    /// not parse) rather than failures during execution.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidLabel { .. }
                | Error::InvalidPauli(_)
                | Error::UnsupportedModel(_)
                | Error::InvalidTopology(_)
                | Error::InvalidProbability { .. }
                | Error::InvalidScale(_)
                | Error::Parse { .. }
        )
    }
}
