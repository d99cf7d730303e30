use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("wavenumber sample ({0}, {1}) lies outside the propagating disk")]
    InvalidSample(i64, i64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("scattering grid is not passive: sum |S|^2 = {0}")]
    NonPassive(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("pattern evaluated outside its sampled grid at theta={theta}, phi={phi}")]
    OutOfRange { theta: f64, phi: f64 },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("covariance is not positive semidefinite (min eigenvalue {0})")]
    NotPsd(f64),
    #[error("stacked channel is rank deficient ({rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },
    #[error("invalid stride: {0}")]
    Stride(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
