use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed or inconsistent input.
    #[error("invalid input: {0}")]
    Input(String),
    /// An exhaustive enumeration would exceed its configured cap.
    #[error("capacity exceeded: {what} needs {needed} but the cap is {cap}")]
    Capacity { what: String, needed: u128, cap: u128 },
    /// Rejection sampling ran out of retries.
    #[error("instance generation failed: {0}")]
    Generation(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn capacity(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            needed,
            cap,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
