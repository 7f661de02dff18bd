use std::fmt;
use std::io;
use std::path::PathBuf;

/// Where in an input file a parse problem was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Locator {
    pub source: String,
    pub line: Option<usize>,
}

impl Locator {
    pub fn new(source: impl Into<String>) -> Self {
        Locator {
            source: source.into(),
            line: None,
        }
    }

    pub fn line(source: impl Into<String>, line: usize) -> Self {
        Locator {
            source: source.into(),
            line: Some(line),
        }
    }
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}", self.source, line),
            None => write!(f, "{}", self.source),
        }
    }
}

/// Broad class of an [`Error`], used by the command line tool to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or arguments.
    Config,
    /// Malformed or inconsistent input data, or a violated operation contract.
    Data,
    /// The external simplifier misbehaved or could not be reached.
    External,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("parse error at {at}: {message}")]
    Parse { at: Locator, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A record that must be unique already exists.
    #[error("conflict: {0}")]
    Conflict(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("subprocess exited with {status}: {stderr_tail}")]
    ProcessExit { status: String, stderr_tail: String },

    #[error("transport error{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Transport { status: Option<u16>, message: String },

    #[error("timeout after {seconds}s in batch {batch}")]
    Timeout { batch: usize, seconds: f64 },

    #[error("objective failed for candidate {candidate}: {source}")]
    Candidate {
        candidate: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(at: Locator, message: impl Into<String>) -> Self {
        Error::Parse {
            at,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    pub fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Integrity(_)
            | Error::Domain(_)
            | Error::Conflict(_) => ErrorKind::Data,
            Error::Protocol(_)
            | Error::ProcessExit { .. }
            | Error::Transport { .. }
            | Error::Timeout { .. } => ErrorKind::External,
            Error::Candidate { source, .. } => source.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
