use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed exploded form at line {line}: {reason}")]
    MalformedExplodedForm { line: usize, reason: String },

    #[error("refinement refused: region of {lines} lines exceeds cutoff {cutoff}")]
    RefinementRefused { lines: usize, cutoff: usize },

    #[error("malformed conflict at line {line}: {reason}")]
    MalformedConflict { line: usize, reason: String },

    #[error("unknown merge tool {name:?}; valid tools: {valid}")]
    UnknownTool { name: String, valid: String },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("mismatched scenario sets between tools: {0}")]
    InputMismatch(String),

    #[error("corpus validation failed: {0}")]
    CorpusValidation(String),

    #[error("failed to read {path}: {source}")]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    WriteFile {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {reason}")]
    ParseFile { path: PathBuf, reason: String },
}
