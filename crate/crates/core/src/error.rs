use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map one-to-one onto the failure classes the command-line
/// front end reports with distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A value is outside the domain an operation accepts (negative radius,
    /// non-finite coordinate, zero budget, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A mathematical domain violation (e.g. Lambert W below -1/e).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or incomplete configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The large-network assumption does not hold for these parameters.
    #[error("guard violation: {0}")]
    Guard(String),

    /// Trace ingestion failed or produced no usable data.
    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
