use thiserror::Error;

#[derive(Debug, Error)]
pub enum QvlaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("undeclared generator: {0}")]
    Schema(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("relation rewriting did not terminate within {0} steps (non-confluent relations?)")]
    NonConfluentRelations(usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
