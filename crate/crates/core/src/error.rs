use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = AgcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AgcError {
    /// Malformed input text, with the 1-based line number it came from.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input violates a documented precondition (shapes, counts, ranges).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A quantity is mathematically undefined for the given argument.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: Box<AgcError>,
    },

    /// The adaptive loop hit an undefined criterion; carries the trace so far.
    #[error("aborted at iteration {t}: {reason}")]
    Aborted {
        t: usize,
        reason: String,
        trace: Box<crate::driver::AgcTrace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl AgcError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        AgcError::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        AgcError::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        AgcError::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Attach the offending file path.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        AgcError::Input {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad user input rather than an internal fault.
    pub fn is_user_error(&self) -> bool {
        match self {
            AgcError::Parse { .. }
            | AgcError::Validation(_)
            | AgcError::Domain(_)
            | AgcError::Aborted { .. } => true,
            AgcError::Input { source, .. } => {
                source.is_user_error() || matches!(**source, AgcError::Io(_))
            }
            AgcError::Io(_) | AgcError::Json(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn user_errors_are_classified() {
        let io = || AgcError::Io(std::io::Error::other("disk"));
        assert!(AgcError::validation("x").is_user_error());
        assert!(AgcError::parse(3, "x").in_file("a.txt").is_user_error());
        assert!(io().in_file("a.txt").is_user_error());
        assert!(!io().is_user_error());
        let json = serde_json::from_str::<u8>("nope").unwrap_err();
        assert!(!AgcError::from(json).is_user_error());
    }
}
