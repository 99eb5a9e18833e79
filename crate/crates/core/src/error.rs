use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain an operation accepts (e.g. a pixel
    /// channel wider than the LUT's bit depth).
    #[error("input out of domain: {0}")]
    InputDomain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("degenerate line: {0}")]
    DegenerateLine(String),
    #[error("render error: {0}")]
    Render(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
