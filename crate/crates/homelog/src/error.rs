use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library. The CLI maps these onto exit codes:
/// parse/configuration problems exit 2, infeasible operations exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("events {0} and {1} overlap (end of the first is after start of the second)")]
    OverlappingEvents(usize, usize),

    #[error("sensor `{0}` has no metadata entry")]
    UnknownSensor(String),

    #[error("location `{0}` is not an area of the transition model")]
    UnknownLocation(String),

    #[error("no path between `{from}` and `{to}` in the transition model")]
    DisconnectedModel { from: String, to: String },

    #[error("no valid repair exists for this log under the given model")]
    InfeasibleRepair,

    #[error("oracle bounds exceeded: {0}")]
    OracleBounds(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: u64,
        message: String,
    },

    #[error("repair result does not match the log it claims to correct: {0}")]
    Integrity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(path: &str, line: u64, column: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }
}
