use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("invalid merge: {0}")]
    InvalidMerge(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;
