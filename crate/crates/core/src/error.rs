use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed document: {0}")]
    Format(String),
    #[error("unknown instance id `{0}`")]
    UnknownInstance(String),
    #[error("pipeline failed at stage `{stage}`: {detail}")]
    Pipeline { stage: &'static str, detail: String },
    #[error("interior sample of the set is empty; the no-low-dimensional-components hypothesis cannot be checked")]
    EmptyInterior,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
