use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid object parameters: {0}")]
    InvalidParams(String),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("pusher offset places the pusher inside the object (depth {0:.3e} m)")]
    PusherInsideObject(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("history holds {have} tuples, {need} required")]
    ShortHistory { have: usize, need: usize },
    #[error("dataset has {have} sequences, batch size is {batch}")]
    DatasetTooSmall { have: usize, batch: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
    #[error("training diverged at step {0}")]
    Diverged(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
