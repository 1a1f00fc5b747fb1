use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("work budget exceeded in {what}: needs more than {limit} steps")]
    Budget { what: &'static str, limit: u64 },
    #[error("cannot embed H with {h_vertices} vertices into {n} vertices")]
    Embedding { h_vertices: usize, n: usize },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
