use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read root {path}: {source}")]
    UnreadableRoot {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown entry `{0}`")]
    UnknownEntry(String),
    #[error("bad builtin table line {line}: {text}")]
    BuiltinTable { line: usize, text: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed call graph {path}: {reason}")]
    Graph { path: PathBuf, reason: String },
}

/// Why a module could not be analysed. Analysis of other modules continues.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModuleError {
    #[error("{0}: not valid UTF-8")]
    Encoding(String),
    #[error("{module}: syntax error at line {line}: {message}")]
    Syntax { module: String, line: u32, message: String },
    #[error("{0}: unreadable: {1}")]
    Io(String, String),
}
