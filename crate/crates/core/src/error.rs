use crate::rigor::RigorError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Rigor(#[from] RigorError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid blueprint: {0}")]
    InvalidBlueprint(String),
    #[error("infeasible perturbation: {0}")]
    InfeasiblePerturbation(String),
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),
    #[error("infeasible blueprint: {0}")]
    InfeasibleBlueprint(String),
    #[error("too large: {0}")]
    TooLarge(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
