use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-contract input.
    #[error("input error: {0}")]
    Input(String),

    /// A file could not be parsed; `line` is 1-based, 0 when not tied to a line.
    #[error("{}: {}{msg}", path.display(), if *line > 0 { format!("line {line}: ") } else { String::new() })]
    Format { path: PathBuf, line: usize, msg: String },

    /// Non-finite values or a failed iterative routine.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input (files, flags, shapes); false for numeric failures.
    pub fn is_input(&self) -> bool {
        !matches!(self, Error::Numeric(_))
    }
}
