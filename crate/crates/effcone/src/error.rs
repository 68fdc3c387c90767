use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("slope and discriminant are undefined for rank zero")]
    RankZero,
    #[error("twisting requires a line-bundle character")]
    NotLineBundle,
    #[error("slope {0} does not give an integral exceptional character")]
    NotExceptionalSlope(String),
    #[error("malformed exceptional pair: {0}")]
    MalformedPair(String),
    #[error("no completion pair found for {0} within the database bounds")]
    CompletionNotFound(String),
    #[error("database coverage: {0}")]
    Coverage(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),
    #[error("inconsistent resolution bookkeeping: {0}")]
    Bookkeeping(String),
    #[error("non-salient ray set")]
    NonSalient,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cache i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
