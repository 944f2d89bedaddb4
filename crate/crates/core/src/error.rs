use std::path::PathBuf;

use thiserror::Error;

/// Things that can go wrong anywhere in the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid initial condition: {0}")]
    InitialCondition(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    /// A configuration problem, tagged with the 1-based line it came from
    /// (line 0 means the problem is not attributable to a single line).
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("diagnostics series needs at least 2 rows, got {0}")]
    ShortSeries(usize),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
