use serde::Serialize;

/// Everything that can go wrong in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit count must be even and at least 2, got {0}")]
    OddQubitCount(usize),
    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },
    #[error("site {0} appears twice")]
    DuplicateSite(usize),
    #[error("expected length {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{what} needs {bytes} bytes, limit is {limit}")]
    MemoryGuard { what: String, bytes: u128, limit: u128 },
    #[error("Renyi index {n} outside supported range {min}..={max}")]
    RenyiOutOfRange { n: usize, min: usize, max: usize },
    #[error("closed form needs an even layer count, got T={0}; use the lightcone method")]
    OddLayers(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("Pauli expectation for {label} has imaginary part {imag:e}")]
    NonRealExpectation { label: String, imag: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OddQubitCount(_) => "odd_qubit_count",
            Error::SiteOutOfRange { .. } => "site_out_of_range",
            Error::DuplicateSite(_) => "duplicate_site",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::MemoryGuard { .. } => "memory_guard",
            Error::RenyiOutOfRange { .. } => "renyi_out_of_range",
            Error::OddLayers(_) => "odd_layers",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::Unsupported(_) => "unsupported",
            Error::NonRealExpectation { .. } => "non_real_expectation",
            Error::Parse { .. } => "parse",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson {
            error: self.kind(),
            message: self.to_string(),
        })
        .expect("error json")
    }
}

/// Dense objects larger than this are refused.
pub const DENSE_BYTE_LIMIT: u128 = 1 << 31;

pub(crate) fn check_dense(what: &str, bytes: u128) -> Result<()> {
    if bytes > DENSE_BYTE_LIMIT {
        return Err(Error::MemoryGuard {
            what: what.to_string(),
            bytes,
            limit: DENSE_BYTE_LIMIT,
        });
    }
    Ok(())
}
