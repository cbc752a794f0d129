use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("{n_qubits} qubits exceeds the dense cap of {cap}")]
    DenseCapExceeded { n_qubits: usize, cap: usize },

    #[error("imaginary residue {residue:e} exceeds tolerance ({context})")]
    ImaginaryResidue { residue: f64, context: String },

    #[error("integral symmetry violated: {0}")]
    Symmetry(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("base geometry absent")]
    BaseGeometryAbsent,

    #[error("grid point {0} missing from stencil")]
    MissingPoint(String),

    #[error("grid failed gauge validation with {0} violation(s); override required")]
    GaugeInconsistent(usize),

    #[error("inconsistent grid: {0}")]
    InconsistentGrid(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("parameter vector has length {found}, circuit has {expected} gates")]
    ParameterLength { expected: usize, found: usize },

    #[error("invalid electron count {n_electrons} for {n_orbitals} spatial orbitals")]
    ElectronCount { n_electrons: usize, n_orbitals: usize },

    #[error("empty gate pool")]
    EmptyPool,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("spectrum degenerate within {tolerance:e} (gap {gap:e})")]
    Degenerate { gap: f64, tolerance: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),

    #[error("nonpositive mass {mass} for atom {atom}")]
    Mass { atom: usize, mass: f64 },

    #[error("unsupported derivative order {0}")]
    Order(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
